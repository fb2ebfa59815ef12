#include "rgsr/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rgsr {

namespace {
constexpr int kLeafSize = 16;
}

NeighborIndex::NeighborIndex(const PointCloud& cloud) : NeighborIndex(cloud.points, cloud.frame) {}

NeighborIndex::NeighborIndex(std::vector<Point3> points, std::string frame)
    : pts_(std::move(points)), frame_(std::move(frame)) {
  if (pts_.empty()) throw std::invalid_argument("NeighborIndex: empty cloud");
  for (const auto& p : pts_) {
    if (!p.allFinite()) throw std::invalid_argument("NeighborIndex: non-finite point");
  }
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * pts_.size() / kLeafSize + 4);
  build(0, static_cast<int>(pts_.size()));
  leaf_pts_.resize(pts_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) leaf_pts_[k] = pts_[order_[k]];
}

int NeighborIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Point3 lo = pts_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return pts_[a][dim] < pts_[b][dim]; });
  const double split = pts_[order_[mid]][dim];

  nodes_[id].dim = dim;
  nodes_[id].split = split;
  build(begin, mid);  // left child is id + 1
  nodes_[id].right = build(mid, end);
  return id;
}

Neighbor NeighborIndex::nearest(const Point3& query) const {
  Neighbor best;
  best.distance = std::numeric_limits<double>::infinity();
  search_nearest(0, query, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

Neighbor NeighborIndex::nearest_within(const Point3& query, double max_dist) const {
  Neighbor best;
  // Seed the bound just above max_dist^2 so boundary points (d == max_dist)
  // still win the strict comparison; callers filter on d <= max_dist.
  best.distance = max_dist * max_dist * (1.0 + 1e-12) + 1e-300;
  search_nearest(0, query, best);
  if (best.index < 0) {
    best.distance = std::numeric_limits<double>::infinity();
    return best;
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

void NeighborIndex::search_nearest(int node, const Point3& q, Neighbor& best) const {
  const Node& n = nodes_[node];
  if (n.dim < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const double d2 = (leaf_pts_[i] - q).squaredNorm();
      const int idx = order_[i];
      if (d2 < best.distance || (d2 == best.distance && idx < best.index)) {
        best.distance = d2;
        best.index = idx;
      }
    }
    return;
  }
  const double diff = q[n.dim] - n.split;
  const int near = diff < 0.0 ? node + 1 : n.right;
  const int far = diff < 0.0 ? n.right : node + 1;
  search_nearest(near, q, best);
  // Visit the far side on exact ties as well: an equidistant point there may
  // carry a lower original index.
  if (diff * diff <= best.distance) search_nearest(far, q, best);
}

std::vector<int> NeighborIndex::radius_search(const Point3& query, double radius) const {
  std::vector<int> out;
  search_radius(0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void NeighborIndex::search_radius(int node, const Point3& q, double r2, std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.dim < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      if ((leaf_pts_[i] - q).squaredNorm() <= r2) out.push_back(order_[i]);
    }
    return;
  }
  const double diff = q[n.dim] - n.split;
  const int near = diff < 0.0 ? node + 1 : n.right;
  const int far = diff < 0.0 ? n.right : node + 1;
  search_radius(near, q, r2, out);
  if (diff * diff <= r2) search_radius(far, q, r2, out);
}

}  // namespace rgsr
