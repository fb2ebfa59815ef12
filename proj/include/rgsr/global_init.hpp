#pragma once

#include "rgsr/kdtree.hpp"
#include "rgsr/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rgsr::global_init {

struct FpfhConfig {
  double voxel = 0.5;
  double feature_radius = 1.0;
  double max_corr = 2.0;
  std::int64_t ransac_iterations = 4'000'000;
  std::uint64_t rng_seed = 42;

  // Desk-scale budget: cap evaluated hypotheses and exit early once the
  // confidence target is met; the full iteration count is a field-data budget.
  std::int64_t max_hypothesis_evals = 100'000;
  double confidence = 0.999;
  int max_match_points = 4000;   // descriptor matching subsample (stride)
  int max_score_corrs = 2000;    // correspondences used to score a hypothesis
};

constexpr int kFpfhBins = 33;
using Descriptor = std::array<double, kFpfhBins>;

struct FeatureCloud {
  PointCloud keypoints;                 // voxel-downsampled
  std::vector<Descriptor> descriptors;  // one per keypoint; zeros when invalid
  std::vector<std::uint8_t> valid;      // 0 = insufficient neighborhood, excluded from matching
};

/// One centroid per occupied voxel; output keeps first-occurrence cell order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Surface normals from PCA over feature_radius neighborhoods, oriented
/// toward +z. Points with fewer than 5 neighbors are marked invalid.
std::vector<Point3> estimate_normals(const PointCloud& cloud, const NeighborIndex& index,
                                     double radius, std::vector<std::uint8_t>& valid);

/// 33-bin FPFH descriptors for the given keypoints (no downsampling).
std::vector<Descriptor> fpfh_descriptors(const PointCloud& keypoints, double feature_radius,
                                         std::vector<std::uint8_t>& valid);

/// 33-bin FPFH descriptors of the voxel-downsampled cloud.
FeatureCloud fpfh(const PointCloud& cloud, const FpfhConfig& cfg);

struct RansacResult {
  RigidTransform transform;
  bool success = false;
  int inliers = 0;
  std::int64_t evaluated = 0;
};

/// Feature-matching RANSAC: mutual-nearest descriptor matches, 3-point
/// hypotheses with an edge-length pre-check, inlier count under max_corr.
/// Deterministic for a fixed cfg.rng_seed regardless of thread count.
RansacResult ransac_register(const FeatureCloud& src, const FeatureCloud& dst,
                             const FpfhConfig& cfg);

}  // namespace rgsr::global_init
