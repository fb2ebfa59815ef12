#pragma once

#include "rgsr/benchmark.hpp"
#include "rgsr/scan_pair.hpp"
#include "rgsr/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rgsr::io {

// Cloud files. ASCII: one "x y z" per line, '.' decimal, float32 precision.
// Binary: magic "RGSRCLD1", uint64 count, little-endian float32 xyz triples.
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_xyz(const std::filesystem::path& path);
void write_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud_binary(const std::filesystem::path& path);

/// Poses as 16 decimal-text numbers, row-major homogeneous, round-trip exact.
std::string pose_to_text(const RigidTransform& t);
RigidTransform pose_from_text(const std::string& text);

struct PairSetConfig {
  std::string scene = "campus";
  std::uint64_t scene_seed = 1;
  std::uint64_t jitter_seed = 42;
  char protocol = 'B';
  int n_pairs = 40;
  int scans_per_site = 40;
  bool binary_clouds = false;
};

/// Persist pairs plus a versioned manifest; returns the manifest path.
std::filesystem::path write_pairs(const std::filesystem::path& dir,
                                  const std::vector<ScanPair>& pairs,
                                  const PairSetConfig& config);

/// Load every pair listed in the directory's manifest. Malformed per-pair
/// files are reported through `errors` (one message per failed pair) and
/// skipped; a missing or unversioned manifest throws.
std::vector<ScanPair> read_pairs(const std::filesystem::path& dir,
                                 std::vector<std::string>* errors = nullptr);

// Result records as JSON lines, deterministic field order; rmse infinity is
// serialized as null.
void write_records(const std::filesystem::path& path,
                   const std::vector<synth::ScanRecord>& records);
std::vector<synth::ScanRecord> read_records(const std::filesystem::path& path);

struct ReportPaths {
  std::filesystem::path sites_csv;
  std::filesystem::path stages_csv;
  std::filesystem::path scatter_json;
};

/// Emit the per-site table, stage histogram, and the CTF-stage RMSE vs TRE
/// scatter (with Spearman rank correlation) under out_dir.
ReportPaths write_report(const std::filesystem::path& out_dir,
                         const std::vector<synth::ScanRecord>& records,
                         const std::vector<ScanPair>& pairs);

}  // namespace rgsr::io
