#pragma once

#include "rgsr/pipeline.hpp"
#include "rgsr/scan_pair.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace rgsr::synth {

struct TraceEntry {
  std::string label;
  double rmse;
  bool accepted;
};

struct ScanRecord {
  int id = 0;
  std::string site;
  std::string method;
  RigidTransform transform;
  metrics::InlierScore score;
  std::string stage;
  double rmse_ctf = std::numeric_limits<double>::quiet_NaN();      // trace[0] when it is CTF
  double rmse_cascade = std::numeric_limits<double>::quiet_NaN();  // cascade-stage result
  double tre = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceEntry> trace;
  bool error = false;
  std::string error_msg;
  double wall_ms = 0.0;  // wall time; kept out of the serialized record stream
};

/// Run one method over all pairs (parallel over scans, deterministic output).
std::vector<ScanRecord> run_benchmark(std::span<const ScanPair> pairs, pipeline::Method method,
                                      const pipeline::GateConfig& gates);

struct SiteRow {
  std::string site;
  int n = 0;
  double s050 = 0, s075 = 0, s100 = 0;
  double median_rmse = std::numeric_limits<double>::infinity();
  double median_tre = std::numeric_limits<double>::quiet_NaN();
  double lmce_median = std::numeric_limits<double>::quiet_NaN();
  int regressions_vs_ctf = 0;
  int regressions_vs_cascade = 0;
};

struct BenchmarkTable {
  std::vector<SiteRow> sites;  // per site plus trailing "ALL" aggregate
  std::map<std::string, int> stage_histogram;
};

/// Aggregate records into the per-site table. `pairs` supplies odometry for
/// LMCE; pass an empty span to skip it.
BenchmarkTable summarize(std::span<const ScanRecord> records, std::span<const ScanPair> pairs);

}  // namespace rgsr::synth
