// Kernel benchmark: OpenMP batch kernels against their serial twins and the
// brute-force reference. Build target `bench_kernels`, not part of ctest.
#include <benchmark/benchmark.h>

#include "rgsr/icp.hpp"
#include "rgsr/kdtree.hpp"
#include "rgsr/kernels.hpp"
#include "rgsr/metrics.hpp"
#include "rgsr/reference.hpp"
#include "rgsr/stats.hpp"

#include <cmath>

using namespace rgsr;

namespace {

PointCloud terrain_cloud(int n, std::uint64_t seed) {
  stats::Rng rng(seed);
  PointCloud c;
  c.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-50, 50), y = rng.uniform(-50, 50);
    c.points.emplace_back(x, y, 0.6 * std::sin(0.3 * x) + 0.4 * std::cos(0.25 * y));
  }
  return c;
}

const PointCloud& target() {
  static const PointCloud c = terrain_cloud(40000, 7);
  return c;
}

const PointCloud& source() {
  static const PointCloud c = terrain_cloud(12000, 8);
  return c;
}

const NeighborIndex& target_index() {
  static const NeighborIndex idx(target());
  return idx;
}

const RigidTransform probe_transform() {
  RigidTransform t = RigidTransform::from_yaw(0.1);
  t.translation = Eigen::Vector3d(1.0, -0.5, 0.1);
  return t;
}

}  // namespace

static void BM_BatchNearestParallel(benchmark::State& state) {
  std::vector<Neighbor> nn;
  for (auto _ : state) {
    kernels::batch_nearest(target_index(), source().points, probe_transform(), nn);
    benchmark::DoNotOptimize(nn.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(source().size()));
}
BENCHMARK(BM_BatchNearestParallel)->Unit(benchmark::kMillisecond);

static void BM_BatchNearestSerial(benchmark::State& state) {
  std::vector<Neighbor> nn;
  for (auto _ : state) {
    kernels::batch_nearest_serial(target_index(), source().points, probe_transform(), nn);
    benchmark::DoNotOptimize(nn.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(source().size()));
}
BENCHMARK(BM_BatchNearestSerial)->Unit(benchmark::kMillisecond);

static void BM_NearestBruteForce(benchmark::State& state) {
  // Brute-force reference on a reduced query set (full set would take minutes).
  const auto t = probe_transform();
  for (auto _ : state) {
    double sum = 0;
    for (int i = 0; i < 200; ++i) {
      sum += ref::nearest_brute(target().points, t(source().points[i])).distance;
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_NearestBruteForce)->Unit(benchmark::kMillisecond);

static void BM_TransformPointsParallel(benchmark::State& state) {
  std::vector<Point3> out;
  for (auto _ : state) {
    kernels::transform_points(probe_transform(), source().points, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_TransformPointsParallel)->Unit(benchmark::kMillisecond);

static void BM_TransformPointsSerial(benchmark::State& state) {
  std::vector<Point3> out;
  for (auto _ : state) {
    kernels::transform_points_serial(probe_transform(), source().points, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_TransformPointsSerial)->Unit(benchmark::kMillisecond);

static void BM_InlierRmse(benchmark::State& state) {
  for (auto _ : state) {
    const auto s = metrics::inlier_rmse(source(), target_index(), probe_transform(), 2.0);
    benchmark::DoNotOptimize(s.rmse);
  }
}
BENCHMARK(BM_InlierRmse)->Unit(benchmark::kMillisecond);

static void BM_IcpStage(benchmark::State& state) {
  for (auto _ : state) {
    const auto r = icp::icp_stage(source(), target_index(), probe_transform(), 3.0, 10);
    benchmark::DoNotOptimize(r.iterations);
  }
}
BENCHMARK(BM_IcpStage)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
