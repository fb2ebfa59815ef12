// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Heavier than the unit tests; the interesting settings (gates,
// schedules, jitter, seeds) are the benchmark defaults.
#include "rgsr/benchmark.hpp"
#include "rgsr/fm_bev.hpp"
#include "rgsr/io.hpp"
#include "rgsr/kdtree.hpp"
#include "rgsr/metrics.hpp"
#include "rgsr/pipeline.hpp"
#include "rgsr/reference.hpp"
#include "rgsr/scene.hpp"
#include "rgsr/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rgsr;
using Clock = std::chrono::steady_clock;

namespace {

// Regression floors measured on the seed-pinned bring-up run of this exact
// configuration (campus/highov presets, protocol B, jitter seed 42), frozen
// with a small margin. The RGSR floor sits strictly above the CTF floor.
// Bring-up measured 0.925 (RGSR) vs 0.705 (CTF) on this exact 200-scan set.
constexpr double kHighOverlapRgsrTransFloor = 0.88;
constexpr double kHighOverlapCtfTransFloor = 0.60;

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Outcome> g_outcomes;

void report(const std::string& name, bool pass, const std::string& detail, double seconds) {
  g_outcomes.push_back({name, pass, detail, seconds});
  std::printf("[%s] %s — %s (%.1f s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
}

template <typename F>
void criterion(const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = body();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  report(name, pass, detail, std::chrono::duration<double>(Clock::now() - t0).count());
}

std::vector<ScanPair> benchmark_pairs(std::size_t* highov_begin) {
  std::vector<ScanPair> pairs;
  int id = 0;
  for (int s = 0; s < 5; ++s) {
    const synth::World w = synth::generate_scene(synth::campus_scene(1 + s));
    synth::TrajectorySpec traj;
    traj.n_scans = 60;
    synth::JitterSpec jitter;  // protocol B, seed 42
    auto site = synth::make_trajectory(w, traj, jitter, "campus" + std::to_string(s), id);
    id += traj.n_scans;
    for (auto& p : site) pairs.push_back(std::move(p));
  }
  *highov_begin = pairs.size();
  for (int s = 0; s < 4; ++s) {
    const synth::World w = synth::generate_scene(synth::high_overlap_scene(1 + s));
    synth::TrajectorySpec traj;
    traj.n_scans = 50;
    synth::JitterSpec jitter;
    auto site = synth::make_trajectory(w, traj, jitter, "highov" + std::to_string(s), id);
    id += traj.n_scans;
    for (auto& p : site) pairs.push_back(std::move(p));
  }
  return pairs;
}

double anchor_error(const RigidTransform& t, const RigidTransform& ref) {
  return (t.translation - ref.translation).norm();
}

bool trace_has_prefix(const synth::ScanRecord& r, const char* prefix) {
  for (const auto& e : r.trace) {
    if (e.label.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion("C1 inlier-RMSE matches the brute-force oracle to 1e-12", [] {
    stats::Rng rng(2025);
    int checked = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const int ns = rng.uniform_int(60, 500);
      const int nt = rng.uniform_int(60, 500);
      PointCloud src, dst;
      for (int i = 0; i < ns; ++i) {
        src.points.emplace_back(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-3, 3));
      }
      for (int i = 0; i < nt; ++i) {
        dst.points.emplace_back(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-3, 3));
      }
      RigidTransform t = RigidTransform::from_yaw(rng.uniform(-0.4, 0.4));
      t.translation = Point3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
      NeighborIndex idx(dst);
      const auto fast = metrics::inlier_rmse(src, idx, t, 2.0);
      const auto brute = ref::inlier_rmse_brute(src, dst, t, 2.0);
      if (fast.inlier_count != brute.inlier_count) {
        return std::pair(false, std::string("inlier count mismatch"));
      }
      if (fast.finite() != brute.finite()) {
        return std::pair(false, std::string("guard mismatch"));
      }
      if (fast.finite()) worst = std::max(worst, std::abs(fast.rmse - brute.rmse));
      ++checked;
    }
    // The <50-inlier guard, exercised explicitly.
    PointCloud few;
    for (int i = 0; i < 49; ++i) few.points.emplace_back(i * 3.0, 0, 0);
    NeighborIndex idx(few);
    const auto guard = metrics::inlier_rmse(few, idx, RigidTransform::identity(), 2.0);
    if (guard.finite() || guard.inlier_count != 49) {
      return std::pair(false, std::string("49-inlier guard failed"));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d random pairs, max |drmse| = %.2e", checked, worst);
    return std::pair(worst <= 1e-12, std::string(buf));
  });

  // Shared benchmark run (campus + highov, protocol B, seed 42).
  std::size_t highov_begin = 0;
  const std::vector<ScanPair> pairs = benchmark_pairs(&highov_begin);
  const pipeline::GateConfig gates;
  std::vector<synth::ScanRecord> rgsr_records, ctf_records;

  criterion("C2 zero regressions and monotone S@0.75 chain over 500 protocol-B scans", [&] {
    rgsr_records = synth::run_benchmark(pairs, pipeline::Method::kRgsr, gates);
    ctf_records = synth::run_benchmark(pairs, pipeline::Method::kCtf, gates);
    int reg_cascade = 0, reg_rgsr = 0, errors = 0;
    std::vector<metrics::InlierScore> s_ctf, s_cascade, s_rgsr;
    for (std::size_t i = 0; i < rgsr_records.size(); ++i) {
      const auto& r = rgsr_records[i];
      if (r.error) {
        ++errors;
        continue;
      }
      metrics::InlierScore c;
      c.rmse = r.rmse_ctf;
      s_ctf.push_back(c);
      metrics::InlierScore k;
      k.rmse = r.rmse_cascade;
      s_cascade.push_back(k);
      s_rgsr.push_back(r.score);
      if (r.rmse_cascade > r.rmse_ctf) ++reg_cascade;
      if (r.score.rmse > r.rmse_cascade) ++reg_rgsr;
      // The standalone CTF run must agree bit-for-bit with the cascade's
      // first rung.
      if (ctf_records[i].score.rmse != r.rmse_ctf) ++errors;
    }
    const double a = metrics::success_at(s_ctf, 0.75);
    const double b = metrics::success_at(s_cascade, 0.75);
    const double c = metrics::success_at(s_rgsr, 0.75);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "n=%zu, regressions cascade/ctf=%d rgsr/cascade=%d, S@0.75 %.3f <= %.3f <= %.3f, "
                  "errors=%d",
                  rgsr_records.size(), reg_cascade, reg_rgsr, a, b, c, errors);
    const bool pass = rgsr_records.size() >= 500 && reg_cascade == 0 && reg_rgsr == 0 &&
                      errors == 0 && a <= b && b <= c;
    return std::pair(pass, std::string(buf));
  });

  criterion("C3 high-overlap convergence floors (RGSR above CTF)", [&] {
    if (rgsr_records.empty()) return std::pair(false, std::string("no benchmark records"));
    int n = 0, ok_rgsr = 0, ok_ctf = 0;
    for (std::size_t i = highov_begin; i < pairs.size(); ++i) {
      ++n;
      ok_rgsr += anchor_error(rgsr_records[i].transform, pairs[i].t_ref) < 1.0;
      ok_ctf += anchor_error(ctf_records[i].transform, pairs[i].t_ref) < 1.0;
    }
    const double f_rgsr = static_cast<double>(ok_rgsr) / n;
    const double f_ctf = static_cast<double>(ok_ctf) / n;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "n=%d, trans<1m rgsr %.3f (floor %.3f), ctf %.3f (floor %.3f)", n, f_rgsr,
                  kHighOverlapRgsrTransFloor, f_ctf, kHighOverlapCtfTransFloor);
    static_assert(kHighOverlapRgsrTransFloor > kHighOverlapCtfTransFloor,
                  "frozen floors must order RGSR above CTF");
    const bool pass = n >= 150 && f_rgsr >= kHighOverlapRgsrTransFloor &&
                      f_ctf >= kHighOverlapCtfTransFloor && f_rgsr > f_ctf;
    return std::pair(pass, std::string(buf));
  });

  criterion("C4 directional coverage asymmetry on 20 campus scenes", [] {
    double min_gap = 1.0;
    for (int seed = 1; seed <= 20; ++seed) {
      const synth::World w = synth::generate_scene(synth::campus_scene(seed));
      RigidTransform pose;
      pose.translation = Point3(0, 0, w.terrain_z(0, 0) + w.spec().sensor_height);
      synth::JitterSpec jitter;
      jitter.protocol = synth::Protocol::A;
      const ScanPair pair = synth::make_pair(w, pose, jitter, seed, "cov");
      NeighborIndex aerial_idx(pair.aerial);
      NeighborIndex scan_idx(pair.scan);
      const double fwd = metrics::coverage(pair.scan, aerial_idx, pair.t_ref, 1.0);
      const double rev = metrics::coverage(pair.aerial, scan_idx, pair.t_ref.inverse(), 1.0);
      if (fwd >= rev) return std::pair(false, std::string("direction violated"));
      min_gap = std::min(min_gap, rev - fwd);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "20 scenes, min gap %.3f (>= 0.15)", min_gap);
    return std::pair(min_gap >= 0.15, std::string(buf));
  });

  criterion("C5 FM recovery within one yaw bin and one pixel on >=95% of 50 cases", [] {
    stats::Rng rng(77);
    PointCloud base;
    for (int i = 0; i < 6000; ++i) {
      const double x = rng.uniform(-28, 28), y = rng.uniform(-28, 28);
      base.points.emplace_back(x, y, 0.8 * std::sin(0.25 * x) + 0.6 * std::cos(0.2 * y));
    }
    for (int i = 0; i < 900; ++i) {
      const double t = rng.uniform(0, 1);
      base.points.emplace_back(-12 + 18 * t, 8 + rng.uniform(-1.5, 1.5), 5.0 + rng.uniform(0, 0.5));
      base.points.emplace_back(10 + rng.uniform(-1.5, 1.5), -14 + 16 * t, 9.0 + rng.uniform(0, 0.5));
    }
    const double yaw_bin = M_PI / 360.0;
    int hits = 0;
    for (int k = 0; k < 50; ++k) {
      const double yaw = rng.uniform(-30.0, 30.0) * M_PI / 180.0;
      const double tx = rng.uniform(-20, 20), ty = rng.uniform(-20, 20);
      const RigidTransform truth =
          RigidTransform::translate({tx, ty, 0}) * RigidTransform::yaw_about(yaw, {0, 0, 0});
      PointCloud moved;
      moved.points.reserve(base.size());
      for (const auto& p : base.points) moved.points.push_back(truth(p));
      const auto hyps = fm_bev::fm_propose(base, moved, {0, 0});
      if (hyps.empty() || hyps.size() > 15) continue;
      const auto& top = hyps.front();
      if (std::abs(top.yaw - yaw) <= yaw_bin + 1e-12 && std::abs(top.tx - tx) <= 0.5 + 1e-12 &&
          std::abs(top.ty - ty) <= 0.5 + 1e-12) {
        ++hits;
      }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d/50 recovered", hits);
    return std::pair(hits >= 48, std::string(buf));
  });

  criterion("C6 disabling reverse hypotheses strictly lowers S@0.75 on facade scenes", [] {
    std::vector<ScanPair> facade_pairs;
    int id = 9000;
    for (int s = 0; s < 2; ++s) {
      const synth::World w = synth::generate_scene(synth::facade_heavy_scene(1 + s));
      synth::TrajectorySpec traj;
      traj.n_scans = 50;
      synth::JitterSpec jitter;
      auto site = synth::make_trajectory(w, traj, jitter, "facade" + std::to_string(s), id);
      id += traj.n_scans;
      for (auto& p : site) facade_pairs.push_back(std::move(p));
    }
    pipeline::GateConfig on;
    pipeline::GateConfig off;
    off.enable_reverse = false;
    const auto with_rev = synth::run_benchmark(facade_pairs, pipeline::Method::kRgsr, on);
    const auto without_rev = synth::run_benchmark(facade_pairs, pipeline::Method::kRgsr, off);
    std::vector<metrics::InlierScore> s_on, s_off;
    for (std::size_t i = 0; i < facade_pairs.size(); ++i) {
      s_on.push_back(with_rev[i].score);
      s_off.push_back(without_rev[i].score);
    }
    const double a = metrics::success_at(s_on, 0.75);
    const double b = metrics::success_at(s_off, 0.75);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "n=%zu, S@0.75 with reverse %.3f, without %.3f",
                  facade_pairs.size(), a, b);
    return std::pair(facade_pairs.size() >= 100 && b < a, std::string(buf));
  });

  criterion("C7 Spearman(CTF rmse, TRE) positive and significant", [&] {
    std::vector<double> rmse, tre;
    for (const auto& r : ctf_records) {
      if (r.error || !r.score.finite() || !std::isfinite(r.tre)) continue;
      rmse.push_back(r.score.rmse);
      tre.push_back(r.tre);
    }
    if (rmse.size() < 200) return std::pair(false, std::string("fewer than 200 usable scans"));
    const auto sp = stats::spearman(rmse, tre);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "n=%d, rho=%.3f, p=%.2e", sp.n, sp.rho, sp.p_value);
    return std::pair(sp.rho > 0.0 && sp.p_value < 1e-3, std::string(buf));
  });

  criterion("C8 byte-identical result records across repeated runs", [&] {
    std::vector<ScanPair> subset;
    for (std::size_t i : {0ul, 1ul, 2ul}) subset.push_back(pairs[i]);
    for (std::size_t i = 0; i < 3 && highov_begin + i < pairs.size(); ++i) {
      subset.push_back(pairs[highov_begin + i]);
    }
    const auto run1 = synth::run_benchmark(subset, pipeline::Method::kRgsr, gates);
    const auto run2 = synth::run_benchmark(subset, pipeline::Method::kRgsr, gates);
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rgsr_acceptance_det";
    fs::create_directories(dir);
    io::write_records(dir / "a.jsonl", run1);
    io::write_records(dir / "b.jsonl", run2);
    const bool same = slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu scans, %s", subset.size(),
                  same ? "identical" : "DIFFER");
    return std::pair(same, std::string(buf));
  });

  criterion("C9 gates: cascade stops below tau_g; FM never fires below tau_g", [&] {
    int easy = 0, violations = 0;
    for (const auto& r : rgsr_records) {
      if (r.error || r.trace.empty()) continue;
      if (r.trace.front().label != "ctf") continue;
      if (r.trace.front().rmse < gates.tau_g) {
        ++easy;
        if (trace_has_prefix(r, "two_stage_p30") || trace_has_prefix(r, "fpfh_ransac") ||
            trace_has_prefix(r, "fwd_p") || trace_has_prefix(r, "rev_p") ||
            trace_has_prefix(r, "ransac_fallback")) {
          ++violations;
        }
      }
    }
    // FM gate plus per-scan FM non-regression on a small mixed subset.
    std::vector<ScanPair> subset;
    for (std::size_t i : {0ul, 3ul, 6ul, 9ul}) subset.push_back(pairs[i]);
    for (std::size_t i = 0; i < 4 && highov_begin + i < pairs.size(); ++i) {
      subset.push_back(pairs[highov_begin + i]);
    }
    const auto rg = synth::run_benchmark(subset, pipeline::Method::kRgsr, gates);
    const auto fm = synth::run_benchmark(subset, pipeline::Method::kRgsrFm, gates);
    int fm_violations = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (fm[i].score.rmse > rg[i].score.rmse) ++fm_violations;
      if (rg[i].score.rmse < gates.tau_g && trace_has_prefix(fm[i], "fm_")) ++fm_violations;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d sub-gate scans, %d gate violations, %d FM violations",
                  easy, violations, fm_violations);
    return std::pair(easy > 0 && violations == 0 && fm_violations == 0, std::string(buf));
  });

  criterion("X1 synth throughput: 200 campus pairs persisted inside the desk budget", [] {
    namespace fs = std::filesystem;
    const auto t0 = Clock::now();
    std::vector<ScanPair> pairs;
    int id = 0;
    for (int s = 0; s < 4; ++s) {
      const synth::World w = synth::generate_scene(synth::campus_scene(40 + s));
      synth::TrajectorySpec traj;
      traj.n_scans = 50;
      synth::JitterSpec jitter;
      auto site = synth::make_trajectory(w, traj, jitter, "synthx" + std::to_string(s), id);
      id += traj.n_scans;
      for (auto& p : site) pairs.push_back(std::move(p));
    }
    const fs::path dir = fs::temp_directory_path() / "rgsr_acceptance_synth";
    fs::remove_all(dir);
    io::write_pairs(dir, pairs, io::PairSetConfig{});
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    fs::remove_all(dir);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "200 pairs in %.1f s (< 120 s)", secs);
    return std::pair(secs < 120.0, std::string(buf));
  });

  int failures = 0;
  for (const auto& o : g_outcomes) failures += !o.pass;
  std::printf("%zu criteria, %d failed\n", g_outcomes.size(), failures);
  return failures == 0 ? 0 : 1;
}
