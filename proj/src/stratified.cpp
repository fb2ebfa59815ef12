#include "rgsr/stratified.hpp"

#include "rgsr/stats.hpp"

#include <stdexcept>
#include <vector>

namespace rgsr::stratified {

PointCloud height_subset(const PointCloud& cloud, std::span<const double> heights, double p) {
  if (heights.size() != cloud.size()) throw std::invalid_argument("height_subset: size mismatch");
  if (p <= 0.0 || p > 100.0) throw std::invalid_argument("height_subset: p must be in (0, 100]");
  const double cutoff =
      stats::nearest_rank_quantile(std::vector<double>(heights.begin(), heights.end()), p);
  PointCloud out;
  out.frame = cloud.frame;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (heights[i] <= cutoff) out.points.push_back(cloud.points[i]);
  }
  return out;
}

static std::vector<double> seed_heights(const PointCloud& cloud, const RigidTransform& t0,
                                        HeightFrame frame) {
  std::vector<double> h(cloud.size());
  if (frame == HeightFrame::kNativeZ) {
    for (std::size_t i = 0; i < cloud.size(); ++i) h[i] = cloud.points[i].z();
  } else {
    for (std::size_t i = 0; i < cloud.size(); ++i) h[i] = t0(cloud.points[i]).z();
  }
  return h;
}

icp::IcpOutcome two_stage(const PointCloud& src, const NeighborIndex& target,
                          const RigidTransform& t0, const TwoStageConfig& cfg) {
  if (src.empty()) throw std::invalid_argument("two_stage: empty source");

  // Heights are computed once from the seed transform (or native z) and the
  // subset is held fixed through the coarse stage.
  const std::vector<double> heights = seed_heights(src, t0, cfg.height_frame);
  const PointCloud subset = height_subset(src, heights, cfg.percentile);

  const icp::StageResult coarse = icp::run_schedule(subset, target, t0, cfg.coarse);

  icp::IcpOutcome out;
  out.transform = coarse.transform;
  out.converged_stages = coarse.stages_completed;
  out.flagged = coarse.degenerate;
  if (!coarse.degenerate) {
    const icp::StageResult fine = icp::run_schedule(src, target, coarse.transform, cfg.fine);
    out.transform = fine.transform;
    out.converged_stages += fine.stages_completed;
    out.flagged = fine.degenerate;
  }
  out.score = metrics::inlier_rmse(src, target, out.transform, metrics::kDefaultREval);
  return out;
}

icp::IcpOutcome two_stage_reverse(const PointCloud& ground, const NeighborIndex& ground_index,
                                  const PointCloud& aerial, const NeighborIndex& aerial_index,
                                  const RigidTransform& t0, const TwoStageConfig& cfg) {
  TwoStageConfig rev_cfg = cfg;
  rev_cfg.height_frame = HeightFrame::kNativeZ;

  const icp::IcpOutcome reverse = two_stage(aerial, ground_index, t0.inverse(), rev_cfg);

  // Invert the aerial->scan estimate into a scan->aerial hypothesis, refine
  // with standard forward CTF, and score in the forward direction.
  icp::IcpOutcome out =
      icp::ctf(ground, aerial_index, reverse.transform.inverse(), icp::ctf_schedule());
  out.flagged = out.flagged || reverse.flagged;
  return out;
}

}  // namespace rgsr::stratified
