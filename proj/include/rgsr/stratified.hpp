#pragma once

#include "rgsr/icp.hpp"
#include "rgsr/kdtree.hpp"
#include "rgsr/types.hpp"

#include <span>

namespace rgsr::stratified {

/// Which frame supplies the heights driving percentile selection: forward
/// hypotheses stratify by (seed transform * p).z, reverse hypotheses by the
/// cloud's native z.
enum class HeightFrame { kSeedTransform, kNativeZ };

struct TwoStageConfig {
  icp::StageSchedule coarse{{5.0, 3.0, 2.0}, 50};
  icp::StageSchedule fine{{2.0, 1.5, 1.0}, 50};
  double percentile = 30.0;
  HeightFrame height_frame = HeightFrame::kSeedTransform;
};

/// Points whose height is <= the nearest-rank p-quantile of `heights`
/// (ties at the boundary included). Original point order preserved.
PointCloud height_subset(const PointCloud& cloud, std::span<const double> heights, double p);

/// Coarse ICP on the lowest-percentile subset of the source (target
/// unrestricted), then fine ICP on the full source; scored forward on the
/// full source cloud.
icp::IcpOutcome two_stage(const PointCloud& src, const NeighborIndex& target,
                          const RigidTransform& t0, const TwoStageConfig& cfg);

/// Two-stage with roles swapped (aerial as source, percentiles on its native
/// z) seeded from t0^-1; the result is inverted, refined with forward CTF,
/// and scored forward on the full ground cloud.
icp::IcpOutcome two_stage_reverse(const PointCloud& ground, const NeighborIndex& ground_index,
                                  const PointCloud& aerial, const NeighborIndex& aerial_index,
                                  const RigidTransform& t0, const TwoStageConfig& cfg);

}  // namespace rgsr::stratified
