#include "rgsr/metrics.hpp"

#include "rgsr/kernels.hpp"
#include "rgsr/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace rgsr::metrics {

InlierScore inlier_rmse(const PointCloud& src, const NeighborIndex& target,
                        const RigidTransform& t, double r_eval) {
  if (r_eval <= 0.0) throw std::invalid_argument("inlier_rmse: r_eval must be positive");
  std::vector<Neighbor> nn;
  kernels::batch_nearest_within(target, src.points, t, r_eval, nn);

  InlierScore out;
  out.r_eval = r_eval;
  double sum_sq = 0.0;
  int count = 0;
  for (const Neighbor& n : nn) {  // serial reduction, index order
    if (n.distance <= r_eval) {
      sum_sq += n.distance * n.distance;
      ++count;
    }
  }
  out.inlier_count = count;
  if (count >= kMinInliers) out.rmse = std::sqrt(sum_sq / static_cast<double>(count));
  return out;
}

double coverage(const PointCloud& src, const NeighborIndex& target, const RigidTransform& t,
                double r_cov) {
  if (r_cov <= 0.0) throw std::invalid_argument("coverage: r_cov must be positive");
  if (src.empty()) throw std::invalid_argument("coverage: empty source cloud");
  std::vector<Neighbor> nn;
  kernels::batch_nearest_within(target, src.points, t, r_cov, nn);
  int count = 0;
  for (const Neighbor& n : nn) {
    if (n.distance <= r_cov) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(src.size());
}

double success_at(std::span<const InlierScore> scores, double tau) {
  if (scores.empty()) return 0.0;
  int count = 0;
  for (const InlierScore& s : scores) {
    if (s.rmse < tau) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(scores.size());
}

double tre(const RigidTransform& t_est, const SurveyMarkers& markers) {
  if (markers.empty()) throw std::invalid_argument("tre: no markers");
  std::vector<double> errs;
  errs.reserve(markers.size());
  for (const SurveyMarker& m : markers) {
    errs.push_back((t_est(m.scan) - m.aerial).norm());
  }
  return stats::median(std::move(errs));
}

std::vector<double> lmce(std::span<const RigidTransform> refined,
                         std::span<const RigidTransform> odometry) {
  if (refined.size() != odometry.size()) throw std::invalid_argument("lmce: length mismatch");
  if (refined.size() < 2) throw std::invalid_argument("lmce: need at least two poses");
  std::vector<double> out;
  out.reserve(refined.size() - 1);
  for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
    const Eigen::Vector3d dt = (refined[i].inverse() * refined[i + 1]).translation;
    const Eigen::Vector3d dOdo = (odometry[i].inverse() * odometry[i + 1]).translation;
    out.push_back((dt - dOdo).norm());
  }
  return out;
}

}  // namespace rgsr::metrics
