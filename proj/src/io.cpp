#include "rgsr/io.hpp"

#include "rgsr/stats.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rgsr::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) fail(path, "cannot open for writing");
  return f;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) fail(path, "cannot open for reading");
  return f;
}

}  // namespace

void write_xyz(const fs::path& path, const PointCloud& cloud) {
  std::ofstream f = open_out(path);
  char line[96];
  for (const Point3& p : cloud.points) {
    // float32 precision: values survive the round trip bit-for-bit as floats.
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", static_cast<float>(p.x()),
                  static_cast<float>(p.y()), static_cast<float>(p.z()));
    f << line;
  }
}

PointCloud read_xyz(const fs::path& path) {
  std::ifstream f = open_in(path);
  PointCloud cloud;
  // The format is float32-precision text; parse as float so values land on
  // exactly the written single-precision grid.
  float x, y, z;
  while (f >> x >> y >> z) cloud.points.emplace_back(x, y, z);
  if (!f.eof()) fail(path, "malformed cloud line");
  return cloud;
}

void write_cloud_binary(const fs::path& path, const PointCloud& cloud) {
  std::ofstream f = open_out(path, std::ios::binary);
  f.write("RGSRCLD1", 8);
  const std::uint64_t n = cloud.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const Point3& p : cloud.points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

PointCloud read_cloud_binary(const fs::path& path) {
  std::ifstream f = open_in(path, std::ios::binary);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "RGSRCLD1") fail(path, "bad magic");
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    float xyz[3];
    f.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
    if (!f) fail(path, "truncated cloud");
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  return cloud;
}

std::string pose_to_text(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  std::ostringstream out;
  out.precision(17);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r || c) out << ' ';
      out << m(r, c);
    }
  }
  return out.str();
}

RigidTransform pose_from_text(const std::string& text) {
  std::istringstream in(text);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!(in >> m(r, c))) throw std::runtime_error("pose_from_text: bad pose line");
    }
  }
  return RigidTransform::from_matrix(m);
}

namespace {

void write_pair_meta(const fs::path& path, const ScanPair& pair) {
  std::ofstream f = open_out(path);
  f << "rgsr-pair v1\n";
  f << "id " << pair.id << "\n";
  f << "site " << pair.site << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g", pair.crop_center.x(), pair.crop_center.y());
  f << "crop_center " << buf << "\n";
  f << "t_ref " << pose_to_text(pair.t_ref) << "\n";
  f << "t_init " << pose_to_text(pair.t_init) << "\n";
  f << "odom " << pose_to_text(pair.odom) << "\n";
  for (const SurveyMarker& m : pair.markers) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", m.aerial.x(), m.aerial.y(), m.aerial.z());
    f << "marker " << buf;
    std::snprintf(buf, sizeof(buf), " %.17g %.17g %.17g", m.scan.x(), m.scan.y(), m.scan.z());
    f << buf << "\n";
  }
}

void read_pair_meta(const fs::path& path, ScanPair& pair) {
  std::ifstream f = open_in(path);
  std::string header;
  std::getline(f, header);
  if (header != "rgsr-pair v1") fail(path, "unknown pair meta version");
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (key == "id") {
      in >> pair.id;
    } else if (key == "site") {
      in >> pair.site;
    } else if (key == "crop_center") {
      in >> pair.crop_center.x() >> pair.crop_center.y();
    } else if (key == "t_ref" || key == "t_init" || key == "odom") {
      std::string rest;
      std::getline(in, rest);
      RigidTransform t = pose_from_text(rest);
      if (key == "t_ref") pair.t_ref = t;
      else if (key == "t_init") pair.t_init = t;
      else pair.odom = t;
    } else if (key == "marker") {
      SurveyMarker m;
      in >> m.aerial.x() >> m.aerial.y() >> m.aerial.z() >> m.scan.x() >> m.scan.y() >>
          m.scan.z();
      pair.markers.push_back(m);
    } else if (!key.empty()) {
      fail(path, "unknown pair meta key: " + key);
    }
    if (in.fail()) fail(path, "malformed pair meta line: " + line);
  }
}

}  // namespace

fs::path write_pairs(const fs::path& dir, const std::vector<ScanPair>& pairs,
                     const PairSetConfig& config) {
  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.txt";
  std::ofstream manifest = open_out(manifest_path);
  manifest << "rgsr-manifest v1\n";
  manifest << "scene " << config.scene << "\n";
  manifest << "scene_seed " << config.scene_seed << "\n";
  manifest << "jitter_seed " << config.jitter_seed << "\n";
  manifest << "protocol " << config.protocol << "\n";
  manifest << "cloud_format " << (config.binary_clouds ? "binary" : "xyz") << "\n";
  manifest << "pairs " << pairs.size() << "\n";

  const char* ext = config.binary_clouds ? ".bin" : ".xyz";
  for (const ScanPair& pair : pairs) {
    char stem[64];
    std::snprintf(stem, sizeof(stem), "pair_%05d", pair.id);
    const std::string scan_file = std::string(stem) + "_scan" + ext;
    const std::string aerial_file = std::string(stem) + "_aerial" + ext;
    const std::string meta_file = std::string(stem) + "_meta.txt";
    if (config.binary_clouds) {
      write_cloud_binary(dir / scan_file, pair.scan);
      write_cloud_binary(dir / aerial_file, pair.aerial);
    } else {
      write_xyz(dir / scan_file, pair.scan);
      write_xyz(dir / aerial_file, pair.aerial);
    }
    write_pair_meta(dir / meta_file, pair);
    manifest << "pair " << pair.id << " " << scan_file << " " << aerial_file << " " << meta_file
             << "\n";
  }
  return manifest_path;
}

std::vector<ScanPair> read_pairs(const fs::path& dir, std::vector<std::string>* errors) {
  const fs::path manifest_path = dir / "manifest.txt";
  std::ifstream manifest = open_in(manifest_path);
  std::string header;
  std::getline(manifest, header);
  if (header != "rgsr-manifest v1") fail(manifest_path, "unknown manifest version");

  bool binary = false;
  std::vector<ScanPair> pairs;
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (key == "cloud_format") {
      std::string fmt;
      in >> fmt;
      binary = fmt == "binary";
    } else if (key == "pair") {
      int id;
      std::string scan_file, aerial_file, meta_file;
      if (!(in >> id >> scan_file >> aerial_file >> meta_file)) {
        fail(manifest_path, "malformed pair entry: " + line);
      }
      try {
        ScanPair pair;
        pair.scan = binary ? read_cloud_binary(dir / scan_file) : read_xyz(dir / scan_file);
        pair.scan.frame = "scan";
        pair.aerial = binary ? read_cloud_binary(dir / aerial_file) : read_xyz(dir / aerial_file);
        pair.aerial.frame = "aerial";
        read_pair_meta(dir / meta_file, pair);
        if (pair.scan.empty() || pair.aerial.empty()) {
          throw std::runtime_error("empty cloud in pair " + std::to_string(id));
        }
        pairs.push_back(std::move(pair));
      } catch (const std::exception& e) {
        if (!errors) throw;
        errors->push_back(e.what());
      }
    }
  }
  return pairs;
}

namespace {

json rmse_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return nullptr;
  return v;
}

double rmse_from_json(const json& j, double nan_value) {
  if (j.is_null()) return nan_value;
  return j.get<double>();
}

}  // namespace

void write_records(const fs::path& path, const std::vector<synth::ScanRecord>& records) {
  std::ofstream f = open_out(path);
  for (const synth::ScanRecord& r : records) {
    json j;
    j["id"] = r.id;
    j["site"] = r.site;
    j["method"] = r.method;
    j["stage"] = r.stage;
    j["rmse"] = rmse_json(r.score.rmse);
    j["inliers"] = r.score.inlier_count;
    j["r_eval"] = r.score.r_eval;
    j["rmse_ctf"] = rmse_json(r.rmse_ctf);
    j["rmse_cascade"] = rmse_json(r.rmse_cascade);
    j["tre"] = rmse_json(r.tre);
    {
      const Eigen::Matrix4d m = r.transform.matrix();
      json t = json::array();
      for (int row = 0; row < 4; ++row) {
        for (int col = 0; col < 4; ++col) t.push_back(m(row, col));
      }
      j["transform"] = std::move(t);
    }
    {
      json trace = json::array();
      for (const synth::TraceEntry& e : r.trace) {
        trace.push_back({{"label", e.label}, {"rmse", rmse_json(e.rmse)}, {"accepted", e.accepted}});
      }
      j["trace"] = std::move(trace);
    }
    j["error"] = r.error;
    if (r.error) j["error_msg"] = r.error_msg;
    f << j.dump() << "\n";
  }
}

std::vector<synth::ScanRecord> read_records(const fs::path& path) {
  std::ifstream f = open_in(path);
  std::vector<synth::ScanRecord> records;
  std::string line;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    synth::ScanRecord r;
    r.id = j.at("id").get<int>();
    r.site = j.at("site").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.stage = j.at("stage").get<std::string>();
    r.score.rmse = rmse_from_json(j.at("rmse"), kInf);
    r.score.inlier_count = j.at("inliers").get<int>();
    r.score.r_eval = j.at("r_eval").get<double>();
    r.rmse_ctf = rmse_from_json(j.at("rmse_ctf"), kNan);
    r.rmse_cascade = rmse_from_json(j.at("rmse_cascade"), kNan);
    r.tre = rmse_from_json(j.at("tre"), kNan);
    {
      Eigen::Matrix4d m;
      const json& t = j.at("transform");
      for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = t.at(k).get<double>();
      r.transform = RigidTransform::from_matrix(m);
    }
    for (const json& e : j.at("trace")) {
      r.trace.push_back({e.at("label").get<std::string>(), rmse_from_json(e.at("rmse"), kInf),
                         e.at("accepted").get<bool>()});
    }
    r.error = j.at("error").get<bool>();
    if (r.error) r.error_msg = j.value("error_msg", "");
    records.push_back(std::move(r));
  }
  return records;
}

ReportPaths write_report(const fs::path& out_dir, const std::vector<synth::ScanRecord>& records,
                         const std::vector<ScanPair>& pairs) {
  fs::create_directories(out_dir);
  const synth::BenchmarkTable table = synth::summarize(records, pairs);

  ReportPaths paths;
  paths.sites_csv = out_dir / "sites.csv";
  paths.stages_csv = out_dir / "stages.csv";
  paths.scatter_json = out_dir / "scatter.json";

  {
    std::ofstream f = open_out(paths.sites_csv);
    f << "site,n,s_at_0.50,s_at_0.75,s_at_1.00,median_rmse,median_tre,lmce_median,"
         "regressions_vs_ctf,regressions_vs_cascade\n";
    char buf[256];
    for (const synth::SiteRow& row : table.sites) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n",
                    row.site.c_str(), row.n, row.s050, row.s075, row.s100, row.median_rmse,
                    row.median_tre, row.lmce_median, row.regressions_vs_ctf,
                    row.regressions_vs_cascade);
      f << buf;
    }
  }
  {
    std::ofstream f = open_out(paths.stages_csv);
    f << "stage,count\n";
    for (const auto& [stage, count] : table.stage_histogram) {
      f << stage << "," << count << "\n";
    }
  }
  {
    // CTF-stage RMSE against TRE, reported before hypothesis selection.
    std::vector<double> rmse_ctf, tre;
    json jr = json::array(), jt = json::array(), jf = json::array();
    for (const synth::ScanRecord& r : records) {
      if (r.error) continue;
      jf.push_back(rmse_json(r.score.rmse));
      if (std::isnan(r.rmse_ctf) || std::isinf(r.rmse_ctf) || std::isnan(r.tre)) continue;
      rmse_ctf.push_back(r.rmse_ctf);
      tre.push_back(r.tre);
      jr.push_back(r.rmse_ctf);
      jt.push_back(r.tre);
    }
    json j;
    j["rmse_ctf"] = std::move(jr);
    j["tre"] = std::move(jt);
    j["rmse_final"] = std::move(jf);
    if (rmse_ctf.size() >= 3) {
      const stats::SpearmanResult sp = stats::spearman(rmse_ctf, tre);
      j["spearman_rho"] = sp.rho;
      j["spearman_p"] = sp.p_value;
      j["n"] = sp.n;
    }
    std::ofstream f = open_out(paths.scatter_json);
    f << j.dump(2) << "\n";
  }
  return paths;
}

}  // namespace rgsr::io
