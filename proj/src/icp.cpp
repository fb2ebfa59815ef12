#include "rgsr/icp.hpp"

#include "rgsr/estimate.hpp"
#include "rgsr/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace rgsr::icp {

namespace {
constexpr double kUpdateAngleEps = 1e-7;
constexpr double kUpdateTransEps = 1e-7;
}  // namespace

StageSchedule ctf_schedule() { return {{5.0, 3.0, 2.0, 1.5, 1.0}, 50}; }

StageResult icp_stage(const PointCloud& src, const NeighborIndex& target,
                      const RigidTransform& t0, double max_corr, int iterations,
                      StageTrace* trace) {
  if (max_corr <= 0.0) throw std::invalid_argument("icp_stage: max_corr must be positive");

  StageResult result;
  result.transform = t0;

  std::vector<Neighbor> nn;
  std::vector<Point3> moved, dst;
  moved.reserve(src.size());
  dst.reserve(src.size());

  for (int it = 0; it < iterations; ++it) {
    kernels::batch_nearest_within(target, src.points, result.transform, max_corr, nn);

    moved.clear();
    dst.clear();
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < nn.size(); ++i) {
      if (nn[i].distance <= max_corr) {
        moved.push_back(result.transform(src.points[i]));
        dst.push_back(target.points()[nn[i].index]);
        sq_sum += nn[i].distance * nn[i].distance;
      }
    }
    if (moved.size() < 3) {
      result.degenerate = true;
      return result;
    }

    const auto update = try_estimate_rigid(moved, dst);
    if (!update) {
      result.degenerate = true;
      return result;
    }

    if (trace) {
      trace->mse_before.push_back(sq_sum / static_cast<double>(moved.size()));
      double after = 0.0;
      for (std::size_t i = 0; i < moved.size(); ++i) {
        after += ((*update)(moved[i]) - dst[i]).squaredNorm();
      }
      trace->mse_after.push_back(after / static_cast<double>(moved.size()));
    }

    result.transform = *update * result.transform;
    result.iterations = it + 1;

    if (update->rotation_angle() < kUpdateAngleEps &&
        update->translation.norm() < kUpdateTransEps) {
      break;
    }
  }
  result.transform.orthonormalize();
  return result;
}

StageResult run_schedule(const PointCloud& src, const NeighborIndex& target,
                         const RigidTransform& t0, const StageSchedule& schedule) {
  if (schedule.thresholds.empty()) throw std::invalid_argument("run_schedule: empty schedule");
  StageResult out;
  out.transform = t0;
  for (double thr : schedule.thresholds) {
    StageResult stage =
        icp_stage(src, target, out.transform, thr, schedule.iterations_per_stage);
    out.transform = stage.transform;
    out.iterations += stage.iterations;
    if (stage.degenerate) {
      out.degenerate = true;
      break;
    }
    ++out.stages_completed;
  }
  return out;
}

IcpOutcome ctf(const PointCloud& src, const NeighborIndex& target, const RigidTransform& t0,
               const StageSchedule& schedule) {
  IcpOutcome out;
  const StageResult chained = run_schedule(src, target, t0, schedule);
  out.transform = chained.transform;
  out.flagged = chained.degenerate;
  out.converged_stages = chained.stages_completed;
  out.score = metrics::inlier_rmse(src, target, out.transform, metrics::kDefaultREval);
  return out;
}

}  // namespace rgsr::icp
