#include "rgsr/reference.hpp"

#include <cmath>

namespace rgsr::ref {

Neighbor nearest_brute(std::span<const Point3> cloud, const Point3& query) {
  Neighbor best;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d2 = (cloud[i] - query).squaredNorm();
    if (d2 < best.distance) {
      best.distance = d2;
      best.index = static_cast<int>(i);
    }
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

metrics::InlierScore inlier_rmse_brute(const PointCloud& src, const PointCloud& target,
                                       const RigidTransform& t, double r_eval) {
  metrics::InlierScore out;
  out.r_eval = r_eval;
  double sum_sq = 0.0;
  int count = 0;
  for (const Point3& p : src.points) {
    const Neighbor n = nearest_brute(target.points, t(p));
    if (n.distance <= r_eval) {
      sum_sq += n.distance * n.distance;
      ++count;
    }
  }
  out.inlier_count = count;
  if (count >= metrics::kMinInliers) out.rmse = std::sqrt(sum_sq / static_cast<double>(count));
  return out;
}

double coverage_brute(const PointCloud& src, const PointCloud& target, const RigidTransform& t,
                      double r_cov) {
  int count = 0;
  for (const Point3& p : src.points) {
    if (nearest_brute(target.points, t(p)).distance <= r_cov) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(src.size());
}

}  // namespace rgsr::ref
