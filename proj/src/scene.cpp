#include "rgsr/scene.hpp"

#include "rgsr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgsr::synth {

namespace {
// Stream tags so adding surfaces never perturbs other draws.
constexpr std::uint64_t kTerrainStream = 0x01;
constexpr std::uint64_t kRoofStream = 0x02;
constexpr std::uint64_t kCanopyStream = 0x03;
constexpr std::uint64_t kOdomStream = 0xD0;
}  // namespace

World::World(SceneSpec spec) : spec_(std::move(spec)) {
  stats::Rng rng(stats::stream_seed(spec_.rng_seed, 0x7E));
  for (double& p : phase_) p = rng.uniform(0.0, 2.0 * M_PI);

  const Eigen::Vector2d extent = spec_.extent_max - spec_.extent_min;
  const auto n_mounds = static_cast<std::int64_t>(
      std::llround(spec_.clutter_density * extent.x() * extent.y()));
  stats::Rng mrng(stats::stream_seed(spec_.rng_seed, 0x40));
  mounds_.reserve(n_mounds);
  for (std::int64_t i = 0; i < n_mounds; ++i) {
    Mound m;
    m.x = mrng.uniform(spec_.extent_min.x(), spec_.extent_max.x());
    m.y = mrng.uniform(spec_.extent_min.y(), spec_.extent_max.y());
    m.radius = mrng.uniform(spec_.clutter_radius_min, spec_.clutter_radius_max);
    m.height = mrng.uniform(spec_.clutter_height_min, spec_.clutter_height_max);
    mounds_.push_back(m);
  }

  grid_nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_size_)));
  grid_ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_size_)));
  mound_grid_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
  auto cell_of = [&](double v, double lo, int n) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / cell_size_)), 0, n - 1);
  };
  for (int i = 0; i < static_cast<int>(mounds_.size()); ++i) {
    const Mound& m = mounds_[i];
    const int x0 = cell_of(m.x - m.radius, spec_.extent_min.x(), grid_nx_);
    const int x1 = cell_of(m.x + m.radius, spec_.extent_min.x(), grid_nx_);
    const int y0 = cell_of(m.y - m.radius, spec_.extent_min.y(), grid_ny_);
    const int y1 = cell_of(m.y + m.radius, spec_.extent_min.y(), grid_ny_);
    for (int cy = y0; cy <= y1; ++cy) {
      for (int cx = x0; cx <= x1; ++cx) {
        mound_grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(i);
      }
    }
  }
}

double World::terrain_z(double x, double y) const {
  const double k1 = 2.0 * M_PI / spec_.bump_wavelength;
  const double k2 = 2.0 * M_PI / spec_.detail_wavelength;
  const double k3 = 2.0 * M_PI / spec_.fine_wavelength;
  double z = spec_.base_z + spec_.slope_x * x + spec_.slope_y * y +
             spec_.bump_amp * std::sin(k1 * x + phase_[0]) * std::sin(k1 * y + phase_[1]) +
             spec_.detail_amp * std::sin(k2 * x + phase_[2]) * std::sin(k2 * y + phase_[3]) +
             spec_.fine_amp * std::sin(k3 * x + phase_[4]) * std::sin(k3 * y + phase_[5]);
  if (!mound_grid_.empty()) {
    const int cx = std::clamp(
        static_cast<int>(std::floor((x - spec_.extent_min.x()) / cell_size_)), 0, grid_nx_ - 1);
    const int cy = std::clamp(
        static_cast<int>(std::floor((y - spec_.extent_min.y()) / cell_size_)), 0, grid_ny_ - 1);
    for (int i : mound_grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx]) {
      const Mound& m = mounds_[i];
      const double dx = x - m.x, dy = y - m.y;
      const double r2 = dx * dx + dy * dy;
      const double rad2 = m.radius * m.radius;
      if (r2 < rad2) z += m.height * (1.0 - r2 / rad2);
    }
  }
  return z;
}

double World::roof_z(const BuildingSpec& b) const {
  return terrain_z(b.center.x(), b.center.y()) + b.height;
}

bool World::inside_footprint(double x, double y) const {
  for (const BuildingSpec& b : spec_.buildings) {
    if (std::abs(x - b.center.x()) <= b.size.x() / 2 &&
        std::abs(y - b.center.y()) <= b.size.y() / 2) {
      return true;
    }
  }
  return false;
}

bool World::segment_blocked(const Point3& a, const Point3& b) const {
  for (const BuildingSpec& bd : spec_.buildings) {
    const double zlo = terrain_z(bd.center.x(), bd.center.y()) - 1.0;
    const double zhi = roof_z(bd);
    const Eigen::Vector3d lo(bd.center.x() - bd.size.x() / 2, bd.center.y() - bd.size.y() / 2,
                             zlo);
    const Eigen::Vector3d hi(bd.center.x() + bd.size.x() / 2, bd.center.y() + bd.size.y() / 2,
                             zhi);
    // Slab test, endpoints excluded.
    double tmin = 1e-6, tmax = 1.0 - 1e-6;
    bool miss = false;
    for (int d = 0; d < 3 && !miss; ++d) {
      const double dir = b[d] - a[d];
      if (std::abs(dir) < 1e-12) {
        if (a[d] < lo[d] || a[d] > hi[d]) miss = true;
        continue;
      }
      double t0 = (lo[d] - a[d]) / dir;
      double t1 = (hi[d] - a[d]) / dir;
      if (t0 > t1) std::swap(t0, t1);
      tmin = std::max(tmin, t0);
      tmax = std::min(tmax, t1);
      if (tmin > tmax) miss = true;
    }
    if (!miss) return true;
  }
  return false;
}

World generate_scene(const SceneSpec& spec) {
  const Eigen::Vector2d extent = spec.extent_max - spec.extent_min;
  if (extent.x() <= 0.0 || extent.y() <= 0.0) {
    throw std::invalid_argument("generate_scene: degenerate extent");
  }
  World world(spec);
  PointCloud aerial;
  aerial.frame = "aerial";

  {  // Terrain, top-down visible (building footprints occlude it).
    stats::Rng rng(stats::stream_seed(spec.rng_seed, kTerrainStream));
    const auto n = static_cast<std::int64_t>(
        std::llround(spec.aerial_density * extent.x() * extent.y()));
    aerial.points.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = rng.uniform(spec.extent_min.x(), spec.extent_max.x());
      const double y = rng.uniform(spec.extent_min.y(), spec.extent_max.y());
      if (world.inside_footprint(x, y)) continue;
      aerial.points.emplace_back(x + rng.normal(0, spec.aerial_noise),
                                 y + rng.normal(0, spec.aerial_noise),
                                 world.terrain_z(x, y) + rng.normal(0, spec.aerial_noise));
    }
  }
  {  // Rooftops.
    stats::Rng rng(stats::stream_seed(spec.rng_seed, kRoofStream));
    for (const BuildingSpec& b : spec.buildings) {
      const auto n = static_cast<std::int64_t>(
          std::llround(spec.aerial_density * b.size.x() * b.size.y()));
      const double z = world.roof_z(b);
      for (std::int64_t i = 0; i < n; ++i) {
        const double x = b.center.x() + rng.uniform(-b.size.x() / 2, b.size.x() / 2);
        const double y = b.center.y() + rng.uniform(-b.size.y() / 2, b.size.y() / 2);
        aerial.points.emplace_back(x + rng.normal(0, spec.aerial_noise),
                                   y + rng.normal(0, spec.aerial_noise),
                                   z + rng.normal(0, spec.aerial_noise));
      }
    }
  }
  {  // Canopy tops.
    stats::Rng rng(stats::stream_seed(spec.rng_seed, kCanopyStream));
    for (const CanopySpec& c : spec.canopies) {
      const auto n = static_cast<std::int64_t>(
          std::llround(spec.canopy_density * M_PI * c.radius * c.radius));
      for (std::int64_t i = 0; i < n; ++i) {
        const double r = c.radius * std::sqrt(rng.uniform());
        const double a = rng.uniform(0, 2 * M_PI);
        const double x = c.center.x() + r * std::cos(a);
        const double y = c.center.y() + r * std::sin(a);
        if (world.inside_footprint(x, y)) continue;
        aerial.points.emplace_back(x + rng.normal(0, spec.aerial_noise),
                                   y + rng.normal(0, spec.aerial_noise),
                                   world.terrain_z(x, y) + c.z_hi + rng.normal(0, spec.aerial_noise));
      }
    }
  }

  world.aerial_ = std::move(aerial);
  return world;
}

PointCloud simulate_ground_scan(const World& world, const RigidTransform& pose, double range,
                                std::uint64_t stream) {
  const SceneSpec& spec = world.spec();
  const Point3 origin = pose.translation;
  if (world.inside_footprint(origin.x(), origin.y())) {
    throw std::invalid_argument("simulate_ground_scan: sensor inside a building");
  }
  if (origin.z() <= world.terrain_z(origin.x(), origin.y())) {
    throw std::invalid_argument("simulate_ground_scan: sensor below terrain");
  }

  stats::Rng rng(stats::stream_seed(spec.rng_seed, stream));
  std::vector<Point3> pts;  // site frame

  {  // Terrain within range, line of sight permitting.
    const auto n = static_cast<std::int64_t>(
        std::llround(spec.ground_terrain_density * M_PI * range * range));
    pts.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = range * std::sqrt(rng.uniform());
      const double a = rng.uniform(0, 2 * M_PI);
      const double x = origin.x() + r * std::cos(a);
      const double y = origin.y() + r * std::sin(a);
      if (world.inside_footprint(x, y)) continue;
      const Point3 p(x, y, world.terrain_z(x, y));
      if (world.segment_blocked(origin, p)) continue;
      pts.emplace_back(p.x() + rng.normal(0, spec.ground_noise),
                       p.y() + rng.normal(0, spec.ground_noise),
                       p.z() + rng.normal(0, spec.ground_noise));
    }
  }

  // Facades of sensor-facing walls; rooftops above the sensor never appear.
  for (const BuildingSpec& b : spec.buildings) {
    const double base = world.terrain_z(b.center.x(), b.center.y());
    const double top = base + b.height;
    const double hx = b.size.x() / 2, hy = b.size.y() / 2;
    struct Wall {
      Eigen::Vector2d p0, p1;  // edge endpoints
      Eigen::Vector2d normal;  // outward
    };
    const Wall walls[4] = {
        {{b.center.x() - hx, b.center.y() - hy}, {b.center.x() + hx, b.center.y() - hy}, {0, -1}},
        {{b.center.x() - hx, b.center.y() + hy}, {b.center.x() + hx, b.center.y() + hy}, {0, 1}},
        {{b.center.x() - hx, b.center.y() - hy}, {b.center.x() - hx, b.center.y() + hy}, {-1, 0}},
        {{b.center.x() + hx, b.center.y() - hy}, {b.center.x() + hx, b.center.y() + hy}, {1, 0}},
    };
    for (const Wall& w : walls) {
      const Eigen::Vector2d mid = 0.5 * (w.p0 + w.p1);
      if (w.normal.dot(Eigen::Vector2d(origin.x(), origin.y()) - mid) <= 0.0) continue;
      const double len = (w.p1 - w.p0).norm();
      const auto n = static_cast<std::int64_t>(
          std::llround(spec.ground_wall_density * len * b.height));
      for (std::int64_t i = 0; i < n; ++i) {
        const double s = rng.uniform();
        const Eigen::Vector2d xy = w.p0 + s * (w.p1 - w.p0);
        const Point3 p(xy.x(), xy.y(), rng.uniform(base, top));
        if ((p - origin).norm() > range) continue;
        if (world.segment_blocked(origin, p)) continue;
        pts.emplace_back(p.x() + rng.normal(0, spec.ground_noise),
                         p.y() + rng.normal(0, spec.ground_noise),
                         p.z() + rng.normal(0, spec.ground_noise));
      }
    }
  }

  // Canopy undersides.
  for (const CanopySpec& c : spec.canopies) {
    const auto n = static_cast<std::int64_t>(
        std::llround(spec.canopy_density * M_PI * c.radius * c.radius));
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = c.radius * std::sqrt(rng.uniform());
      const double a = rng.uniform(0, 2 * M_PI);
      const double x = c.center.x() + r * std::cos(a);
      const double y = c.center.y() + r * std::sin(a);
      if (world.inside_footprint(x, y)) continue;
      const Point3 p(x, y, world.terrain_z(x, y) + c.z_lo + rng.uniform(0.0, 0.3));
      if ((p - origin).norm() > range) continue;
      if (world.segment_blocked(origin, p)) continue;
      pts.emplace_back(p.x() + rng.normal(0, spec.ground_noise),
                       p.y() + rng.normal(0, spec.ground_noise),
                       p.z() + rng.normal(0, spec.ground_noise));
    }
  }

  PointCloud scan;
  scan.frame = "scan";
  const RigidTransform inv = pose.inverse();
  scan.points.reserve(pts.size());
  for (const Point3& p : pts) scan.points.push_back(inv(p));
  return scan;
}

ScanPair make_pair(const World& world, const RigidTransform& pose, const JitterSpec& jitter,
                   int scan_index, const std::string& site) {
  ScanPair pair;
  pair.id = scan_index;
  pair.site = site;
  pair.t_ref = pose;
  pair.crop_center = Eigen::Vector2d(pose.translation.x(), pose.translation.y());

  pair.scan = simulate_ground_scan(world, pose, world.spec().ground_range,
                                   stats::stream_seed(world.spec().rng_seed, 0x5C, static_cast<std::uint64_t>(scan_index)));

  pair.aerial.frame = world.aerial().frame;
  constexpr double kCropRadius = 50.0;
  for (const Point3& p : world.aerial().points) {
    const double dx = p.x() - pair.crop_center.x();
    const double dy = p.y() - pair.crop_center.y();
    if (dx * dx + dy * dy <= kCropRadius * kCropRadius) pair.aerial.points.push_back(p);
  }
  if (pair.aerial.empty()) throw std::runtime_error("make_pair: empty aerial crop");

  if (jitter.protocol == Protocol::A) {
    pair.t_init = pair.t_ref;
  } else {
    stats::Rng rng(stats::stream_seed(jitter.seed, static_cast<std::uint64_t>(scan_index)));
    const double dx = rng.uniform(-jitter.xy_range, jitter.xy_range);
    const double dy = rng.uniform(-jitter.xy_range, jitter.xy_range);
    const double dyaw = rng.uniform(-jitter.yaw_range_deg, jitter.yaw_range_deg) * M_PI / 180.0;
    pair.t_init = RigidTransform::translate({dx, dy, 0.0}) *
                  RigidTransform::yaw_about(dyaw, pair.t_ref.translation) * pair.t_ref;
  }

  // Markers on stable structure: roof corners of nearby buildings, topped up
  // with terrain probes when the scene is too sparse.
  const RigidTransform inv_ref = pair.t_ref.inverse();
  for (const BuildingSpec& b : world.spec().buildings) {
    if ((b.center - pair.crop_center).norm() > 45.0) continue;
    const double z = world.roof_z(b);
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const Point3 corner(b.center.x() + sx * b.size.x() / 2,
                            b.center.y() + sy * b.size.y() / 2, z);
        pair.markers.push_back({corner, inv_ref(corner)});
      }
    }
    if (pair.markers.size() >= 8) break;
  }
  if (pair.markers.size() < 4) {
    for (const auto& d : {Eigen::Vector2d(10, 0), Eigen::Vector2d(0, 10), Eigen::Vector2d(-10, 0),
                          Eigen::Vector2d(0, -10)}) {
      const double x = pair.crop_center.x() + d.x(), y = pair.crop_center.y() + d.y();
      const Point3 probe(x, y, world.terrain_z(x, y));
      pair.markers.push_back({probe, inv_ref(probe)});
    }
  }

  pair.odom = pair.t_ref;
  return pair;
}

std::vector<ScanPair> make_trajectory(const World& world, const TrajectorySpec& traj,
                                      const JitterSpec& jitter, const std::string& site,
                                      int id_offset) {
  std::vector<ScanPair> pairs(traj.n_scans);
  const double yaw = std::atan2(traj.step.y(), traj.step.x());
  std::string first_error;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < traj.n_scans; ++i) {
    try {
      const Eigen::Vector2d xy = traj.start + static_cast<double>(i) * traj.step;
      RigidTransform pose = RigidTransform::from_yaw(yaw);
      pose.translation =
          Point3(xy.x(), xy.y(), world.terrain_z(xy.x(), xy.y()) + world.spec().sensor_height);
      pairs[i] = make_pair(world, pose, jitter, id_offset + i, site);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);
  // Chained odometry: exact relative motion plus small per-step noise.
  stats::Rng rng(stats::stream_seed(world.spec().rng_seed, kOdomStream));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0) {
      pairs[0].odom = pairs[0].t_ref;
      continue;
    }
    const RigidTransform rel = pairs[i - 1].t_ref.inverse() * pairs[i].t_ref;
    const RigidTransform noise = RigidTransform::translate(
        {rng.normal(0, traj.odom_noise), rng.normal(0, traj.odom_noise),
         rng.normal(0, traj.odom_noise)});
    pairs[i].odom = pairs[i - 1].odom * rel * noise;
  }
  return pairs;
}

SceneSpec campus_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.rng_seed = seed;
  spec.ground_range = 66.0;
  spec.sensor_height = 2.0;
  stats::Rng rng(stats::stream_seed(seed, 0xCA));
  // Boxes flank a corridor along the x axis.
  for (int i = 0; i < 5; ++i) {
    BuildingSpec b;
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    b.center = Eigen::Vector2d(rng.uniform(-38, 38), side * rng.uniform(26, 40));
    b.size = Eigen::Vector2d(rng.uniform(8, 12), rng.uniform(8, 12));
    b.height = rng.uniform(5, 8);
    spec.buildings.push_back(b);
  }
  for (int i = 0; i < 5; ++i) {
    CanopySpec c;
    const double side = i % 2 == 0 ? -1.0 : 1.0;
    c.center = Eigen::Vector2d(rng.uniform(-35, 35), side * rng.uniform(10, 24));
    c.radius = rng.uniform(4, 6);
    c.z_lo = 2.5;
    c.z_hi = 6.0;
    spec.canopies.push_back(c);
  }
  return spec;
}

SceneSpec high_overlap_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.rng_seed = seed;
  spec.bump_amp = 0.6;
  spec.clutter_density = 0.13;
  spec.clutter_height_min = 1.3;
  spec.clutter_height_max = 2.3;
  stats::Rng rng(stats::stream_seed(seed, 0xB0));
  for (int i = 0; i < 2; ++i) {
    BuildingSpec b;
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    b.center = Eigen::Vector2d(rng.uniform(-30, 30), side * rng.uniform(20, 34));
    b.size = Eigen::Vector2d(rng.uniform(8, 12), rng.uniform(8, 12));
    b.height = rng.uniform(4, 6);
    spec.buildings.push_back(b);
  }
  for (int i = 0; i < 2; ++i) {
    CanopySpec c;
    c.center = Eigen::Vector2d(rng.uniform(-30, 30), (i % 2 ? 1.0 : -1.0) * rng.uniform(18, 30));
    c.radius = rng.uniform(3, 5);
    c.z_lo = 2.5;
    c.z_hi = 5.5;
    spec.canopies.push_back(c);
  }
  return spec;
}

SceneSpec facade_heavy_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.rng_seed = seed;
  spec.ground_range = 55.0;
  spec.ground_terrain_density = 1.1;
  spec.ground_wall_density = 4.0;
  spec.bump_amp = 0.6;
  stats::Rng rng(stats::stream_seed(seed, 0xFA));
  // One-sided street wall: heavy facades line the +y side of the corridor;
  // the -y side stays open so the aerial floor keeps a ground counterpart.
  for (int i = 0; i < 4; ++i) {
    BuildingSpec b;
    b.center = Eigen::Vector2d(-27 + 18 * i + rng.uniform(-2, 2), rng.uniform(8.5, 11.0));
    b.size = Eigen::Vector2d(rng.uniform(9, 12), rng.uniform(5, 7));
    b.height = rng.uniform(9, 12);
    spec.buildings.push_back(b);
  }
  for (int i = 0; i < 3; ++i) {
    CanopySpec c;
    c.center = Eigen::Vector2d(rng.uniform(-30, 30), (i % 2 ? 1.0 : -1.0) * rng.uniform(20, 32));
    c.radius = rng.uniform(4, 6);
    c.z_lo = 2.5;
    c.z_hi = 6.5;
    spec.canopies.push_back(c);
  }
  return spec;
}

SceneSpec scene_by_name(const std::string& name, std::uint64_t seed) {
  if (name == "campus") return campus_scene(seed);
  if (name == "highov") return high_overlap_scene(seed);
  if (name == "facade") return facade_heavy_scene(seed);
  throw std::invalid_argument("unknown scene preset: " + name);
}

}  // namespace rgsr::synth
