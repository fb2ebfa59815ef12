#pragma once

#include "rgsr/kdtree.hpp"
#include "rgsr/types.hpp"

#include <limits>
#include <span>
#include <vector>

namespace rgsr::metrics {

/// Scores with fewer than this many inliers are reported as +infinity.
constexpr int kMinInliers = 50;
constexpr double kDefaultREval = 2.0;

struct InlierScore {
  double rmse = std::numeric_limits<double>::infinity();
  int inlier_count = 0;
  double r_eval = kDefaultREval;

  bool finite() const { return rmse < std::numeric_limits<double>::infinity(); }
};

/// Forward-direction inlier RMSE of src under T against the indexed target:
/// RMSE of NN distances <= r_eval over the full source cloud, +infinity when
/// fewer than kMinInliers points qualify.
InlierScore inlier_rmse(const PointCloud& src, const NeighborIndex& target,
                        const RigidTransform& t, double r_eval = kDefaultREval);

/// Fraction of source points whose NN in the indexed cloud lies within r_cov.
double coverage(const PointCloud& src, const NeighborIndex& target, const RigidTransform& t,
                double r_cov);

/// Fraction of scores with rmse strictly below tau (+infinity never counts).
double success_at(std::span<const InlierScore> scores, double tau);

/// Translation recovery error: median over markers of ||t_est(scan_k) - aerial_k||.
double tre(const RigidTransform& t_est, const SurveyMarkers& markers);

/// Local motion consistency: per-step ||trans(T_i^-1 T_{i+1}) - trans(O_i^-1 O_{i+1})||.
std::vector<double> lmce(std::span<const RigidTransform> refined,
                         std::span<const RigidTransform> odometry);

}  // namespace rgsr::metrics
