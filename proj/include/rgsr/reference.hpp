#pragma once

#include "rgsr/metrics.hpp"
#include "rgsr/types.hpp"

#include <span>

// Serial brute-force reference implementations. These never touch the
// NeighborIndex or the OpenMP kernels; tests use them as independent oracles
// and the kernel benchmark compares against them.
namespace rgsr::ref {

/// O(n) scan in input order; ties keep the first (lowest-index) point.
Neighbor nearest_brute(std::span<const Point3> cloud, const Point3& query);

/// O(n*m) inlier RMSE with the same <kMinInliers -> infinity guard.
metrics::InlierScore inlier_rmse_brute(const PointCloud& src, const PointCloud& target,
                                       const RigidTransform& t, double r_eval);

double coverage_brute(const PointCloud& src, const PointCloud& target, const RigidTransform& t,
                      double r_cov);

}  // namespace rgsr::ref
