#include "rgsr/pipeline.hpp"

#include "rgsr/fm_bev.hpp"
#include "rgsr/kernels.hpp"
#include "rgsr/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace rgsr::pipeline {

void GateConfig::validate() const {
  if (!(0.0 < phase2_low && phase2_low < tau_g && tau_g < phase2_high)) {
    throw std::invalid_argument("GateConfig: need 0 < phase2_low < tau_g < phase2_high");
  }
  if (r_eval != metrics::kDefaultREval) {
    throw std::invalid_argument("GateConfig: scoring is defined at r_eval = 2.0 m");
  }
  if (percentiles.empty()) throw std::invalid_argument("GateConfig: empty percentile set");
}

HypothesisRecord accept_if_better(const HypothesisRecord& incumbent,
                                  const HypothesisRecord& candidate) {
  if (candidate.score.rmse < incumbent.score.rmse) {
    HypothesisRecord out = candidate;
    out.accepted = true;
    return out;
  }
  return incumbent;
}

namespace {

// Evaluate a candidate against the incumbent and append it to the trace with
// its acceptance outcome.
void consider(PipelineResult& out, HypothesisRecord cand) {
  cand.accepted = cand.score.rmse < out.final.score.rmse;
  out.final = accept_if_better(out.final, cand);
  out.trace.push_back(std::move(cand));
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kCtf: return "ctf";
    case Method::kTwoStage: return "two_stage";
    case Method::kCascade: return "cascade";
    case Method::kRgsr: return "rgsr";
    case Method::kRgsrFm: return "rgsr_fm";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::kCtf, Method::kTwoStage, Method::kCascade, Method::kRgsr,
                   Method::kRgsrFm}) {
    if (name == method_name(m)) return m;
  }
  return std::nullopt;
}

PairRunner::PairRunner(const ScanPair& pair, const GateConfig& gates)
    : pair_(pair), gates_(gates), aerial_index_(pair.aerial) {
  gates_.validate();
  if (pair_.scan.empty()) throw std::invalid_argument("PairRunner: empty scan");
}

const NeighborIndex& PairRunner::ground_index() {
  if (!ground_index_) ground_index_ = std::make_unique<NeighborIndex>(pair_.scan);
  return *ground_index_;
}

const global_init::FeatureCloud& PairRunner::scan_features() {
  if (!scan_features_) {
    scan_features_ = std::make_unique<global_init::FeatureCloud>(
        global_init::fpfh(pair_.scan, global_init::FpfhConfig{}));
  }
  return *scan_features_;
}

const global_init::FeatureCloud& PairRunner::aerial_features() {
  if (!aerial_features_) {
    aerial_features_ = std::make_unique<global_init::FeatureCloud>(
        global_init::fpfh(pair_.aerial, global_init::FpfhConfig{}));
  }
  return *aerial_features_;
}

HypothesisRecord PairRunner::score_record(std::string label,
                                          const icp::IcpOutcome& outcome) const {
  HypothesisRecord rec;
  rec.label = std::move(label);
  rec.transform = outcome.transform;
  rec.score = outcome.score;
  rec.flagged = outcome.flagged;
  return rec;
}

HypothesisRecord PairRunner::ransac_record(std::string label, std::uint64_t attempt) {
  global_init::FpfhConfig cfg;
  // Fresh-sample stream: base seed + scan id + attempt counter.
  cfg.rng_seed = gates_.seed + static_cast<std::uint64_t>(pair_.id) + attempt;
  const global_init::RansacResult r =
      global_init::ransac_register(scan_features(), aerial_features(), cfg);
  if (!r.success) {
    HypothesisRecord rec;
    rec.label = std::move(label);
    rec.transform = pair_.t_init;
    rec.flagged = true;  // score stays +infinity
    return rec;
  }
  return score_record(std::move(label),
                      icp::ctf(pair_.scan, aerial_index_, r.transform, icp::ctf_schedule()));
}

PipelineResult PairRunner::run_ctf() {
  PipelineResult out;
  HypothesisRecord rec =
      score_record("ctf", icp::ctf(pair_.scan, aerial_index_, pair_.t_init, icp::ctf_schedule()));
  rec.accepted = true;
  out.trace.push_back(rec);
  out.final = rec;
  return out;
}

PipelineResult PairRunner::run_two_stage() {
  stratified::TwoStageConfig cfg;
  PipelineResult out;
  HypothesisRecord rec = score_record(
      "two_stage_p30", stratified::two_stage(pair_.scan, aerial_index_, pair_.t_init, cfg));
  rec.accepted = true;
  out.trace.push_back(rec);
  out.final = rec;
  return out;
}

PipelineResult PairRunner::run_cascade() {
  PipelineResult out = run_ctf();

  if (out.final.score.rmse >= gates_.tau_g) {
    stratified::TwoStageConfig cfg;
    HypothesisRecord cand = score_record(
        "two_stage_p30", stratified::two_stage(pair_.scan, aerial_index_, pair_.t_init, cfg));
    consider(out, cand);
  }

  if (out.final.score.rmse >= gates_.tau_g) {
    HypothesisRecord cand = ransac_record("fpfh_ransac", 0);
    consider(out, cand);
  }
  return out;
}

std::optional<HypothesisRecord> PairRunner::band_refine(const HypothesisRecord& incumbent,
                                                        BandRefineInfo* info) {
  std::vector<Neighbor> nn;
  kernels::batch_nearest_within(aerial_index_, pair_.scan.points, incumbent.transform,
                                gates_.r_eval, nn);

  struct Inlier {
    double height;
    double residual;
    int index;
  };
  std::vector<Inlier> inliers;
  inliers.reserve(pair_.scan.size());
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (nn[i].distance <= gates_.r_eval) {
      const double h = incumbent.transform(pair_.scan.points[i]).z();
      inliers.push_back({h, nn[i].distance, static_cast<int>(i)});
    }
  }
  if (static_cast<int>(inliers.size()) < metrics::kMinInliers) return std::nullopt;

  std::sort(inliers.begin(), inliers.end(), [](const Inlier& a, const Inlier& b) {
    return a.height != b.height ? a.height < b.height : a.index < b.index;
  });

  // Four equal-count height bins; remainders go to the lowest bins.
  const std::size_t n = inliers.size();
  std::array<std::pair<std::size_t, std::size_t>, 4> bins;
  std::size_t start = 0;
  for (int b = 0; b < 4; ++b) {
    std::size_t len = n / 4 + (static_cast<std::size_t>(b) < n % 4 ? 1 : 0);
    bins[b] = {start, start + len};
    start += len;
  }

  int best_bin = 0;
  double best_median = std::numeric_limits<double>::infinity();
  for (int b = 0; b < 4; ++b) {
    if (bins[b].second == bins[b].first) continue;
    std::vector<double> residuals;
    residuals.reserve(bins[b].second - bins[b].first);
    for (std::size_t i = bins[b].first; i < bins[b].second; ++i) {
      residuals.push_back(inliers[i].residual);
    }
    const double med = stats::median(std::move(residuals));
    if (med < best_median) {  // strict: ties stay with the lowest bin
      best_median = med;
      best_bin = b;
    }
  }
  if (info) {
    info->selected_bin = best_bin;
    info->selected_median = best_median;
  }

  PointCloud band;
  band.frame = pair_.scan.frame;
  for (std::size_t i = bins[best_bin].first; i < bins[best_bin].second; ++i) {
    band.points.push_back(pair_.scan.points[inliers[i].index]);
  }

  const icp::StageResult refined = icp::run_schedule(
      band, aerial_index_, incumbent.transform, icp::StageSchedule{{0.75, 0.5}, 50});

  HypothesisRecord rec;
  rec.label = "band_refine";
  rec.transform = refined.transform;
  rec.flagged = refined.degenerate;
  rec.score = metrics::inlier_rmse(pair_.scan, aerial_index_, refined.transform, gates_.r_eval);
  return rec;
}

PipelineResult PairRunner::run_rgsr(const PipelineResult& cascade_out) {
  PipelineResult out = cascade_out;

  // Phase 1: multi-percentile hypotheses, p ascending, forward before
  // reverse, strict sequential early exit once below the gate. Hypotheses are
  // seeded from t_init, not the cascade output.
  for (double p : gates_.percentiles) {
    if (out.final.score.rmse < gates_.tau_g) break;
    stratified::TwoStageConfig cfg;
    cfg.percentile = p;
    const std::string suffix = std::to_string(static_cast<int>(p));

    {
      const icp::IcpOutcome ts =
          stratified::two_stage(pair_.scan, aerial_index_, pair_.t_init, cfg);
      const icp::IcpOutcome refined =
          icp::ctf(pair_.scan, aerial_index_, ts.transform, icp::ctf_schedule());
      HypothesisRecord cand = score_record("fwd_p" + suffix, refined);
      cand.flagged = cand.flagged || ts.flagged;
      consider(out, cand);
    }

    if (!gates_.enable_reverse) continue;
    if (out.final.score.rmse < gates_.tau_g) break;
    {
      const icp::IcpOutcome rev = stratified::two_stage_reverse(
          pair_.scan, ground_index(), pair_.aerial, aerial_index_, pair_.t_init, cfg);
      HypothesisRecord cand = score_record("rev_p" + suffix, rev);
      consider(out, cand);
    }
  }

  // Phase 2: residual-guided band refinement inside the (0.5, 1.0) band.
  if (out.final.score.rmse > gates_.phase2_low && out.final.score.rmse < gates_.phase2_high) {
    if (auto cand = band_refine(out.final)) {
      consider(out, *cand);
    }
  }

  // Phase 3: one fresh RANSAC + CTF attempt.
  if (out.final.score.rmse >= gates_.phase3_gate) {
    HypothesisRecord cand = ransac_record("ransac_fallback", 1);
    consider(out, cand);
  }
  return out;
}

PipelineResult PairRunner::run_fm_extension(const PipelineResult& in, bool enabled) {
  if (!enabled) return in;
  if (in.final.score.rmse < gates_.tau_g) return in;

  PipelineResult out = in;
  const RigidTransform base = in.final.transform;
  PointCloud aligned;
  aligned.frame = pair_.aerial.frame;
  std::vector<Point3> moved;
  kernels::transform_points(base, pair_.scan.points, moved);
  aligned.points = std::move(moved);

  const auto hyps = fm_bev::fm_propose(aligned, pair_.aerial, pair_.crop_center);
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    const RigidTransform lifted = fm_bev::lift_to_se3(hyps[k], base);
    HypothesisRecord cand = score_record(
        "fm_" + std::to_string(k), icp::ctf(pair_.scan, aerial_index_, lifted, icp::ctf_schedule()));
    consider(out, cand);
  }
  return out;
}

PipelineResult PairRunner::run(Method method) {
  switch (method) {
    case Method::kCtf: return run_ctf();
    case Method::kTwoStage: return run_two_stage();
    case Method::kCascade: return run_cascade();
    case Method::kRgsr: return run_rgsr(run_cascade());
    case Method::kRgsrFm: return run_fm_extension(run_rgsr(run_cascade()), true);
  }
  throw std::logic_error("unknown method");
}

PipelineResult cascade(const ScanPair& pair, const GateConfig& gates) {
  PairRunner runner(pair, gates);
  return runner.run_cascade();
}

PipelineResult rgsr(const ScanPair& pair, const PipelineResult& cascade_out,
                    const GateConfig& gates) {
  PairRunner runner(pair, gates);
  return runner.run_rgsr(cascade_out);
}

PipelineResult fm_extension(const ScanPair& pair, const PipelineResult& in,
                            const GateConfig& gates, bool enabled) {
  PairRunner runner(pair, gates);
  return runner.run_fm_extension(in, enabled);
}

}  // namespace rgsr::pipeline
