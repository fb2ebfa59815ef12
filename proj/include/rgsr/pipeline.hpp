#pragma once

#include "rgsr/global_init.hpp"
#include "rgsr/icp.hpp"
#include "rgsr/kdtree.hpp"
#include "rgsr/metrics.hpp"
#include "rgsr/scan_pair.hpp"
#include "rgsr/stratified.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rgsr::pipeline {

struct GateConfig {
  double tau_g = 0.75;       // cascade escalation / early-exit gate
  double phase2_low = 0.5;   // band refinement band
  double phase2_high = 1.0;
  double phase3_gate = 1.0;  // RANSAC fallback gate
  double r_eval = 2.0;
  std::vector<double> percentiles{15.0, 30.0, 45.0, 60.0};
  std::uint64_t seed = 42;
  bool enable_reverse = true;  // reverse-direction hypotheses (ablation switch)

  void validate() const;
};

struct HypothesisRecord {
  std::string label;  // ctf, two_stage_p30, fwd_p15, rev_p45, band_refine, ...
  RigidTransform transform;
  metrics::InlierScore score;
  bool accepted = false;
  bool flagged = false;
};

struct PipelineResult {
  HypothesisRecord final;
  std::vector<HypothesisRecord> trace;

  const std::string& stage_of_selection() const { return final.label; }
};

/// Portfolio rule: the candidate replaces the incumbent only on strictly
/// lower RMSE; infinity never wins against anything finite.
HypothesisRecord accept_if_better(const HypothesisRecord& incumbent,
                                  const HypothesisRecord& candidate);

enum class Method { kCtf, kTwoStage, kCascade, kRgsr, kRgsrFm };
const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

/// Per-scan driver: owns the target index and caches shared intermediates
/// (ground index for reverse runs, FPFH features) across stages.
class PairRunner {
 public:
  PairRunner(const ScanPair& pair, const GateConfig& gates);

  PipelineResult run_ctf();
  PipelineResult run_two_stage();  // standalone two-stage (p = 30)
  PipelineResult run_cascade();
  PipelineResult run_rgsr(const PipelineResult& cascade_out);
  PipelineResult run_fm_extension(const PipelineResult& in, bool enabled);
  PipelineResult run(Method method);

  struct BandRefineInfo {
    int selected_bin = -1;       // 0 = lowest heights
    double selected_median = 0;  // median residual of the selected bin
  };
  /// Residual-guided height-band refinement candidate; empty when fewer than
  /// kMinInliers forward inliers exist under the incumbent transform.
  std::optional<HypothesisRecord> band_refine(const HypothesisRecord& incumbent,
                                              BandRefineInfo* info = nullptr);

 private:
  HypothesisRecord score_record(std::string label, const icp::IcpOutcome& outcome) const;
  HypothesisRecord ransac_record(std::string label, std::uint64_t attempt);
  const NeighborIndex& ground_index();
  const global_init::FeatureCloud& scan_features();
  const global_init::FeatureCloud& aerial_features();

  const ScanPair& pair_;
  GateConfig gates_;
  NeighborIndex aerial_index_;
  std::unique_ptr<NeighborIndex> ground_index_;
  std::unique_ptr<global_init::FeatureCloud> scan_features_;
  std::unique_ptr<global_init::FeatureCloud> aerial_features_;
};

/// Spec-level convenience wrappers over PairRunner.
PipelineResult cascade(const ScanPair& pair, const GateConfig& gates);
PipelineResult rgsr(const ScanPair& pair, const PipelineResult& cascade_out,
                    const GateConfig& gates);
PipelineResult fm_extension(const ScanPair& pair, const PipelineResult& in,
                            const GateConfig& gates, bool enabled);

}  // namespace rgsr::pipeline
