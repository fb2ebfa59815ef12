#pragma once

#include "rgsr/kdtree.hpp"
#include "rgsr/metrics.hpp"
#include "rgsr/types.hpp"

#include <vector>

namespace rgsr::icp {

/// Decreasing max-correspondence distances, fixed iteration budget per stage.
struct StageSchedule {
  std::vector<double> thresholds;
  int iterations_per_stage = 50;
};

/// The standard coarse-to-fine schedule.
StageSchedule ctf_schedule();

struct StageResult {
  RigidTransform transform;
  bool degenerate = false;  // stopped on <3 usable correspondences
  int iterations = 0;
  int stages_completed = 0;  // filled by run_schedule
};

/// Optional per-iteration diagnostics: correspondence-set MSE before and after
/// the closed-form update, at that iteration's fixed correspondences.
struct StageTrace {
  std::vector<double> mse_before;
  std::vector<double> mse_after;
};

/// One point-to-point ICP stage: alternate NN correspondences (within
/// max_corr) and closed-form rigid alignment. Stops early when the update is
/// below 1e-7 rad / 1e-7 m. Iterations that cannot form >=3 correspondences
/// end the stage with the last valid transform, flagged.
StageResult icp_stage(const PointCloud& src, const NeighborIndex& target,
                      const RigidTransform& t0, double max_corr, int iterations,
                      StageTrace* trace = nullptr);

/// Chains icp_stage over a schedule without scoring; a degenerate stage stops
/// the chain.
StageResult run_schedule(const PointCloud& src, const NeighborIndex& target,
                         const RigidTransform& t0, const StageSchedule& schedule);

struct IcpOutcome {
  RigidTransform transform;
  metrics::InlierScore score;  // forward direction, full source cloud, r_eval = 2.0
  int converged_stages = 0;
  bool flagged = false;
};

/// Coarse-to-fine ICP: the schedule chained from t0, scored with inlier RMSE.
IcpOutcome ctf(const PointCloud& src, const NeighborIndex& target, const RigidTransform& t0,
               const StageSchedule& schedule);

}  // namespace rgsr::icp
