#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rgsr/benchmark.hpp"
#include "rgsr/fm_bev.hpp"
#include "rgsr/io.hpp"
#include "rgsr/scene.hpp"
#include "rgsr/stats.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rgsr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rgsr_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<ScanPair> tiny_pairs(int n) {
  synth::SceneSpec spec = synth::high_overlap_scene(77);
  spec.extent_min = {-45, -45};
  spec.extent_max = {45, 45};
  spec.ground_range = 35.0;
  spec.aerial_density = 2.5;
  spec.ground_terrain_density = 0.6;
  const synth::World world = synth::generate_scene(spec);
  synth::TrajectorySpec traj;
  traj.n_scans = n;
  traj.start = {-6, 0};
  traj.step = {2.0, 0.0};
  synth::JitterSpec jitter;
  return synth::make_trajectory(world, traj, jitter, "tiny");
}

}  // namespace

TEST_CASE("pose text round trip is bit exact") {
  stats::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    RigidTransform t = RigidTransform::from_yaw(rng.uniform(-3, 3));
    t.rotation = (Eigen::AngleAxisd(rng.uniform(-1, 1), Eigen::Vector3d::UnitX()) *
                  Eigen::AngleAxisd(rng.uniform(-3, 3), Eigen::Vector3d::UnitZ()))
                     .toRotationMatrix();
    t.translation = Point3(rng.uniform(-1000, 1000), rng.uniform(-1000, 1000), rng.normal(0, 10));
    const RigidTransform back = io::pose_from_text(io::pose_to_text(t));
    CHECK((back.matrix().array() == t.matrix().array()).all());
  }
}

TEST_CASE("cloud files: float32 quantization for text, exact for binary") {
  stats::Rng rng(6);
  PointCloud c;
  for (int i = 0; i < 500; ++i) {
    c.points.emplace_back(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.normal(0, 5));
  }
  const fs::path dir = temp_dir("clouds");

  io::write_xyz(dir / "c.xyz", c);
  const PointCloud text = io::read_xyz(dir / "c.xyz");
  REQUIRE(text.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(text.points[i][k] == static_cast<double>(static_cast<float>(c.points[i][k])));
    }
  }

  io::write_cloud_binary(dir / "c.bin", c);
  const PointCloud bin = io::read_cloud_binary(dir / "c.bin");
  REQUIRE(bin.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(bin.points[i][k] == static_cast<double>(static_cast<float>(c.points[i][k])));
    }
  }
}

TEST_CASE("pair set round trip preserves poses bit-exactly; manifest deterministic") {
  const auto pairs = tiny_pairs(3);
  const fs::path dir_a = temp_dir("pairs_a");
  const fs::path dir_b = temp_dir("pairs_b");
  io::PairSetConfig cfg;
  io::write_pairs(dir_a, pairs, cfg);
  io::write_pairs(dir_b, pairs, cfg);

  CHECK(slurp(dir_a / "manifest.txt") == slurp(dir_b / "manifest.txt"));
  CHECK(slurp(dir_a / "pair_00000_meta.txt") == slurp(dir_b / "pair_00000_meta.txt"));
  CHECK(slurp(dir_a / "pair_00001_scan.xyz") == slurp(dir_b / "pair_00001_scan.xyz"));

  const auto loaded = io::read_pairs(dir_a);
  REQUIRE(loaded.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(loaded[i].id == pairs[i].id);
    CHECK(loaded[i].site == pairs[i].site);
    CHECK((loaded[i].t_ref.matrix().array() == pairs[i].t_ref.matrix().array()).all());
    CHECK((loaded[i].t_init.matrix().array() == pairs[i].t_init.matrix().array()).all());
    CHECK(loaded[i].markers.size() == pairs[i].markers.size());
    CHECK(loaded[i].scan.size() == pairs[i].scan.size());
  }
}

TEST_CASE("read_pairs reports malformed pairs and continues") {
  const auto pairs = tiny_pairs(3);
  const fs::path dir = temp_dir("pairs_bad");
  io::write_pairs(dir, pairs, io::PairSetConfig{});
  {
    std::ofstream f(dir / "pair_00001_scan.xyz");
    f << "not a number at all\n";
  }
  std::vector<std::string> errors;
  const auto loaded = io::read_pairs(dir, &errors);
  CHECK(loaded.size() == 2);
  CHECK(errors.size() == 1);

  CHECK_THROWS(io::read_pairs(temp_dir("pairs_missing")));
}

TEST_CASE("single-pair set: two cloud files plus one metadata record") {
  const auto pairs = tiny_pairs(1);
  const fs::path dir = temp_dir("single");
  io::write_pairs(dir, pairs, io::PairSetConfig{});
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(fs::exists(dir / "pair_00000_scan.xyz"));
  CHECK(fs::exists(dir / "pair_00000_aerial.xyz"));
  CHECK(fs::exists(dir / "pair_00000_meta.txt"));
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 4);
}

TEST_CASE("record files round trip including infinities") {
  std::vector<synth::ScanRecord> records(3);
  records[0].id = 1;
  records[0].site = "s";
  records[0].method = "rgsr";
  records[0].stage = "ctf";
  records[0].score.rmse = 0.5;
  records[0].score.inlier_count = 123;
  records[0].rmse_ctf = 0.5;
  records[0].tre = 0.25;
  records[0].trace = {{"ctf", 0.5, true}};
  records[1].id = 2;
  records[1].site = "s";
  records[1].method = "rgsr";
  records[1].stage = "fpfh_ransac";
  records[1].score.rmse = std::numeric_limits<double>::infinity();
  records[1].trace = {{"ctf", std::numeric_limits<double>::infinity(), true}};
  records[1].rmse_ctf = std::numeric_limits<double>::infinity();
  records[2].id = 3;
  records[2].site = "t";
  records[2].method = "rgsr";
  records[2].error = true;
  records[2].error_msg = "boom";

  const fs::path dir = temp_dir("records");
  io::write_records(dir / "r.jsonl", records);
  const auto back = io::read_records(dir / "r.jsonl");
  REQUIRE(back.size() == 3);
  CHECK(back[0].score.rmse == 0.5);
  CHECK(back[0].trace.size() == 1);
  CHECK(back[1].score.rmse == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(back[1].tre));
  CHECK(back[2].error);
  CHECK(back[2].error_msg == "boom");

  // Deterministic serialization.
  io::write_records(dir / "r2.jsonl", records);
  CHECK(slurp(dir / "r.jsonl") == slurp(dir / "r2.jsonl"));
}

TEST_CASE("benchmark over a tiny pair set: table consistent with records") {
  const auto pairs = tiny_pairs(4);
  pipeline::GateConfig gates;
  const auto records = synth::run_benchmark(pairs, pipeline::Method::kRgsr, gates);
  REQUIRE(records.size() == 4);
  for (const auto& r : records) CHECK(!r.error);

  const auto table = synth::summarize(records, pairs);
  REQUIRE(table.sites.size() == 2);  // "tiny" + ALL
  const auto& row = table.sites.front();
  CHECK(row.site == "tiny");
  CHECK(row.n == 4);
  CHECK(row.regressions_vs_ctf == 0);
  CHECK(row.regressions_vs_cascade == 0);

  // S@tau recomputable from raw records with a one-line filter.
  int below075 = 0;
  for (const auto& r : records) below075 += r.score.rmse < 0.75;
  CHECK(row.s075 == doctest::Approx(static_cast<double>(below075) / 4.0));

  int stage_total = 0;
  for (const auto& [stage, count] : table.stage_histogram) stage_total += count;
  CHECK(stage_total == 4);
}

TEST_CASE("report files recompute from records") {
  const auto pairs = tiny_pairs(4);
  pipeline::GateConfig gates;
  const auto records = synth::run_benchmark(pairs, pipeline::Method::kCascade, gates);
  const fs::path dir = temp_dir("report");
  const auto paths = io::write_report(dir, records, pairs);

  const std::string sites = slurp(paths.sites_csv);
  CHECK(sites.find("site,n,") == 0);
  CHECK(sites.find("tiny,") != std::string::npos);
  CHECK(sites.find("ALL,") != std::string::npos);
  const std::string scatter = slurp(paths.scatter_json);
  CHECK(scatter.find("rmse_ctf") != std::string::npos);
}

TEST_CASE("grid dump writes the documented layout") {
  stats::Rng rng(4);
  PointCloud c;
  for (int i = 0; i < 200; ++i) {
    c.points.emplace_back(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(0, 5));
  }
  const auto grid = fm_bev::rasterize_bev(c, {0, 0});
  const fs::path dir = temp_dir("grid");
  fm_bev::write_grid_dump((dir / "g.grd").string(), grid);
  std::ifstream f(dir / "g.grd", std::ios::binary);
  char magic[8];
  f.read(magic, 8);
  CHECK(std::string(magic, 8) == "RGSRGRD1");
  std::uint32_t dims[3];
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  CHECK(dims[0] == 3);
  CHECK(dims[1] == 200);
  CHECK(dims[2] == 200);
  f.seekg(0, std::ios::end);
  CHECK(static_cast<std::size_t>(f.tellg()) == 8 + 12 + 3ull * 200 * 200 * 4);
}
