#include "rgsr/benchmark.hpp"
#include "rgsr/estimate.hpp"
#include "rgsr/fm_bev.hpp"
#include "rgsr/io.hpp"
#include "rgsr/kdtree.hpp"
#include "rgsr/kernels.hpp"
#include "rgsr/metrics.hpp"
#include "rgsr/pipeline.hpp"
#include "rgsr/reference.hpp"
#include "rgsr/scene.hpp"
#include "rgsr/stats.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace rgsr;

namespace {

// Exit codes: 0 success, 1 config error, 2 data error, 3 invariant violation.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDataError = 2;
constexpr int kInvariantViolation = 3;

struct SynthOptions {
  std::string scene = "campus";
  int n_pairs = 40;
  int scans_per_site = 40;
  std::uint64_t scene_seed = 1;
  std::uint64_t jitter_seed = 42;
  std::string protocol = "B";
  std::string out_dir;
  bool binary = false;
};

int cmd_synth(const SynthOptions& opt) {
  synth::JitterSpec jitter;
  jitter.seed = opt.jitter_seed;
  jitter.protocol = opt.protocol == "A" ? synth::Protocol::A : synth::Protocol::B;

  std::vector<ScanPair> pairs;
  int produced = 0, site_index = 0;
  while (produced < opt.n_pairs) {
    const synth::World world =
        synth::generate_scene(synth::scene_by_name(opt.scene, opt.scene_seed + site_index));
    synth::TrajectorySpec traj;
    traj.n_scans = std::min(opt.scans_per_site, opt.n_pairs - produced);
    auto site_pairs = synth::make_trajectory(
        world, traj, jitter, opt.scene + std::to_string(site_index), produced);
    produced += static_cast<int>(site_pairs.size());
    ++site_index;
    for (auto& p : site_pairs) pairs.push_back(std::move(p));
  }

  io::PairSetConfig cfg;
  cfg.scene = opt.scene;
  cfg.scene_seed = opt.scene_seed;
  cfg.jitter_seed = opt.jitter_seed;
  cfg.protocol = opt.protocol == "A" ? 'A' : 'B';
  cfg.n_pairs = opt.n_pairs;
  cfg.scans_per_site = opt.scans_per_site;
  cfg.binary_clouds = opt.binary;
  const fs::path manifest = io::write_pairs(opt.out_dir, pairs, cfg);
  std::cout << "wrote " << pairs.size() << " pairs across " << site_index << " site(s) to "
            << manifest.parent_path().string() << "\n";
  return kOk;
}

struct RegisterOptions {
  std::string pairs_dir;
  std::string method = "rgsr";
  bool fm = false;
  std::string out_file = "results.jsonl";
  std::string timing_file;
  int threads = 0;
  std::uint64_t seed = 42;
  double tau_g = 0.75;
  bool no_reverse = false;
};

int cmd_register(const RegisterOptions& opt) {
  auto method = pipeline::parse_method(opt.method);
  if (!method) {
    std::cerr << "unknown method: " << opt.method << "\n";
    return kConfigError;
  }
  if (opt.fm && *method == pipeline::Method::kRgsr) method = pipeline::Method::kRgsrFm;

  if (opt.threads > 0) omp_set_num_threads(opt.threads);

  std::vector<std::string> errors;
  std::vector<ScanPair> pairs;
  try {
    pairs = io::read_pairs(opt.pairs_dir, &errors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  for (const std::string& e : errors) std::cerr << "warning: skipped pair: " << e << "\n";
  if (pairs.empty()) {
    std::cerr << "error: no readable pairs in " << opt.pairs_dir << "\n";
    return kDataError;
  }

  pipeline::GateConfig gates;
  gates.seed = opt.seed;
  gates.tau_g = opt.tau_g;
  gates.enable_reverse = !opt.no_reverse;

  const auto records = synth::run_benchmark(pairs, *method, gates);
  io::write_records(opt.out_file, records);

  if (!opt.timing_file.empty()) {
    std::ofstream f(opt.timing_file);
    f << "id,wall_ms\n";
    for (const auto& r : records) {
      char line[64];
      std::snprintf(line, sizeof(line), "%d,%.3f\n", r.id, r.wall_ms);
      f << line;
    }
  }

  // Non-regression is structural; a violation here is an internal bug.
  int regressions = 0;
  for (const auto& r : records) {
    if (r.error) continue;
    if (!std::isnan(r.rmse_ctf) && r.score.rmse > r.rmse_ctf) ++regressions;
    if (!std::isnan(r.rmse_cascade) && r.score.rmse > r.rmse_cascade) ++regressions;
  }
  int failed = 0;
  for (const auto& r : records) failed += r.error;
  std::cout << "registered " << records.size() - failed << "/" << records.size() << " scans with "
            << pipeline::method_name(*method) << " -> " << opt.out_file << "\n";
  if (regressions > 0) {
    std::cerr << "error: " << regressions << " RMSE regression(s) detected\n";
    return kInvariantViolation;
  }
  return kOk;
}

int cmd_report(const std::string& results_file, const std::string& pairs_dir,
               const std::string& out_dir) {
  std::vector<synth::ScanRecord> records;
  try {
    records = io::read_records(results_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  if (records.empty()) {
    std::cerr << "error: no records in " << results_file << "\n";
    return kDataError;
  }
  std::vector<ScanPair> pairs;
  if (!pairs_dir.empty()) {
    try {
      pairs = io::read_pairs(pairs_dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kDataError;
    }
  }
  const io::ReportPaths paths = io::write_report(out_dir, records, pairs);
  std::cout << "wrote " << paths.sites_csv.string() << ", " << paths.stages_csv.string() << ", "
            << paths.scatter_json.string() << "\n";
  return kOk;
}

int cmd_coverage(const std::string& pairs_dir, double radius, const std::string& out_file) {
  std::vector<ScanPair> pairs;
  try {
    pairs = io::read_pairs(pairs_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_file.empty()) {
    file.open(out_file);
    out = &file;
  }
  *out << "id,site,cov_ground_to_aerial,cov_aerial_to_ground\n";
  for (const ScanPair& pair : pairs) {
    NeighborIndex aerial_idx(pair.aerial);
    NeighborIndex scan_idx(pair.scan);
    const double fwd = metrics::coverage(pair.scan, aerial_idx, pair.t_ref, radius);
    const double rev = metrics::coverage(pair.aerial, scan_idx, pair.t_ref.inverse(), radius);
    char line[128];
    std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f\n", pair.id, pair.site.c_str(), fwd, rev);
    *out << line;
  }
  return kOk;
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    stats::Rng rng(1);
    std::vector<Point3> pts;
    for (int i = 0; i < 400; ++i) {
      pts.emplace_back(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-3, 3));
    }
    NeighborIndex idx(pts);
    bool ok = true;
    for (int q = 0; q < 50; ++q) {
      const Point3 query(rng.uniform(-11, 11), rng.uniform(-11, 11), rng.uniform(-4, 4));
      const Neighbor a = idx.nearest(query);
      const Neighbor b = ref::nearest_brute(pts, query);
      ok = ok && a.index == b.index && a.distance == b.distance;
    }
    check("kd-tree matches brute-force nearest neighbor", ok);
  }
  {
    stats::Rng rng(2);
    std::vector<Point3> src;
    for (int i = 0; i < 40; ++i) {
      src.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    }
    RigidTransform truth = RigidTransform::from_yaw(0.7);
    truth.translation = Point3(2, -1, 0.5);
    std::vector<Point3> dst;
    for (const auto& p : src) dst.push_back(truth(p));
    const RigidTransform est = estimate_rigid(src, dst);
    check("rigid estimation recovers a known transform",
          (est.matrix() - truth.matrix()).cwiseAbs().maxCoeff() < 1e-8);
  }
  {
    stats::Rng rng(3);
    PointCloud a, b;
    for (int i = 0; i < 300; ++i) {
      a.points.emplace_back(rng.uniform(-10, 10), rng.uniform(-10, 10), 0.0);
      b.points.emplace_back(rng.uniform(-10, 10), rng.uniform(-10, 10), 0.0);
    }
    NeighborIndex idx(b);
    const auto fast = metrics::inlier_rmse(a, idx, RigidTransform::identity(), 2.0);
    const auto brute = ref::inlier_rmse_brute(a, b, RigidTransform::identity(), 2.0);
    check("inlier RMSE matches the brute-force oracle",
          fast.inlier_count == brute.inlier_count && std::abs(fast.rmse - brute.rmse) < 1e-12);
  }
  {
    stats::Rng rng(4);
    PointCloud c;
    for (int i = 0; i < 4000; ++i) {
      const double x = rng.uniform(-30, 30), y = rng.uniform(-30, 30);
      c.points.emplace_back(x, y, 0.7 * std::sin(0.3 * x) + 0.5 * std::cos(0.27 * y));
    }
    for (int i = 0; i < 500; ++i) {
      c.points.emplace_back(rng.uniform(-2, 2) + 10, rng.uniform(-2, 2) - 6, 5.0);
    }
    PointCloud shifted;
    for (const auto& p : c.points) shifted.points.push_back(p + Point3(2.0, -1.5, 0));
    const fm_bev::BevGrid ga = fm_bev::rasterize_bev(c, {0, 0});
    const fm_bev::BevGrid gb = fm_bev::rasterize_bev(shifted, {0, 0});
    const auto cands = fm_bev::fm_translation_candidates(ga, gb);
    check("phase correlation recovers an integer BEV shift",
          !cands.empty() && cands[0].tx == 2.0 && cands[0].ty == -1.5);
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? kOk : kInvariantViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-source aerial-ground LiDAR pose refinement benchmark"};
  app.require_subcommand(1);

  SynthOptions synth_opt;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic scan pairs");
  synth_cmd->add_option("--scene", synth_opt.scene, "scene preset: campus, highov, facade");
  synth_cmd->add_option("--pairs", synth_opt.n_pairs, "number of scan pairs");
  synth_cmd->add_option("--scans-per-site", synth_opt.scans_per_site, "trajectory length per site");
  synth_cmd->add_option("--scene-seed", synth_opt.scene_seed, "scene generator seed");
  synth_cmd->add_option("--seed", synth_opt.jitter_seed, "jitter seed");
  synth_cmd->add_option("--protocol", synth_opt.protocol, "A (reference init) or B (jittered)")
      ->check(CLI::IsMember({"A", "B"}));
  synth_cmd->add_option("--out", synth_opt.out_dir, "output directory")->required();
  synth_cmd->add_flag("--binary", synth_opt.binary, "write binary clouds instead of ASCII");

  RegisterOptions reg_opt;
  CLI::App* reg_cmd = app.add_subcommand("register", "run a registration method over pairs");
  reg_cmd->add_option("--pairs", reg_opt.pairs_dir, "pair directory (with manifest.txt)")
      ->required();
  reg_cmd->add_option("--method", reg_opt.method,
                      "ctf, two_stage, cascade, rgsr, rgsr_fm");
  reg_cmd->add_flag("--fm", reg_opt.fm, "enable the spectral BEV extension (with rgsr)");
  reg_cmd->add_option("--out", reg_opt.out_file, "output record file (JSON lines)");
  reg_cmd->add_option("--timing", reg_opt.timing_file, "optional per-scan wall time CSV");
  reg_cmd->add_option("--threads", reg_opt.threads, "worker threads (0 = library default)");
  reg_cmd->add_option("--seed", reg_opt.seed, "base seed for stochastic stages");
  reg_cmd->add_option("--tau-g", reg_opt.tau_g, "cascade escalation gate (m)");
  reg_cmd->add_flag("--no-reverse", reg_opt.no_reverse,
                    "disable reverse-direction hypotheses (ablation)");

  std::string report_results, report_pairs, report_out = "report";
  CLI::App* report_cmd = app.add_subcommand("report", "aggregate result records into tables");
  report_cmd->add_option("--results", report_results, "record file from register")->required();
  report_cmd->add_option("--pairs", report_pairs, "pair directory (enables LMCE)");
  report_cmd->add_option("--out-dir", report_out, "report output directory");

  std::string cov_pairs, cov_out;
  double cov_radius = 1.0;
  CLI::App* cov_cmd = app.add_subcommand("coverage", "directional coverage per pair");
  cov_cmd->add_option("--pairs", cov_pairs, "pair directory")->required();
  cov_cmd->add_option("--radius", cov_radius, "coverage radius (m)");
  cov_cmd->add_option("--out", cov_out, "output CSV (default stdout)");

  app.add_subcommand("selftest", "quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth_opt);
    if (reg_cmd->parsed()) return cmd_register(reg_opt);
    if (report_cmd->parsed()) return cmd_report(report_results, report_pairs, report_out);
    if (cov_cmd->parsed()) return cmd_coverage(cov_pairs, cov_radius, cov_out);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
