#pragma once

#include "rgsr/types.hpp"

#include <limits>
#include <vector>

namespace rgsr {

struct Neighbor {
  int index = -1;
  double distance = std::numeric_limits<double>::infinity();
};

/// Exact nearest-neighbor / radius index over an immutable point cloud.
///
/// Ties in distance resolve to the lowest original point index, matching a
/// brute-force scan in input order, so selection driven by NN results is
/// deterministic. Read queries are safe from multiple threads.
class NeighborIndex {
 public:
  explicit NeighborIndex(const PointCloud& cloud);
  explicit NeighborIndex(std::vector<Point3> points, std::string frame = {});

  Neighbor nearest(const Point3& query) const;

  /// Exact nearest neighbor among points within max_dist of the query
  /// (closed ball); {-1, inf} when none qualifies. For any query whose true
  /// nearest neighbor lies within max_dist this returns exactly nearest().
  Neighbor nearest_within(const Point3& query, double max_dist) const;

  /// Original indices of all points with distance <= radius, ascending.
  std::vector<int> radius_search(const Point3& query, double radius) const;

  const std::vector<Point3>& points() const { return pts_; }
  const std::string& frame() const { return frame_; }
  int size() const { return static_cast<int>(pts_.size()); }

 private:
  struct Node {
    double split = 0.0;
    int dim = -1;  // -1 marks a leaf holding order_[begin, end)
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end);
  void search_nearest(int node, const Point3& q, Neighbor& best) const;
  void search_radius(int node, const Point3& q, double r2, std::vector<int>& out) const;

  std::vector<Point3> pts_;       // original order
  std::vector<int> order_;        // order_[k] = original index of slot k
  std::vector<Point3> leaf_pts_;  // pts_ permuted by order_: contiguous leaf scans
  std::vector<Node> nodes_;
  std::string frame_;
};

}  // namespace rgsr
