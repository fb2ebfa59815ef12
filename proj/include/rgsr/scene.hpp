#pragma once

#include "rgsr/scan_pair.hpp"
#include "rgsr/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rgsr::synth {

struct BuildingSpec {
  Eigen::Vector2d center;
  Eigen::Vector2d size;  // footprint extents (x, y)
  double height;         // above the terrain at its center
};

struct CanopySpec {
  Eigen::Vector2d center;
  double radius;
  double z_lo;  // underside above terrain (ground-visible)
  double z_hi;  // top above terrain (aerial-visible)
};

struct SceneSpec {
  Eigen::Vector2d extent_min{-70.0, -70.0};
  Eigen::Vector2d extent_max{70.0, 70.0};
  double base_z = 0.0;
  double slope_x = 0.02;
  double slope_y = 0.0;
  // Terrain undulation octaves; incommensurate wavelengths so no planar shift
  // within the jitter range aliases the surface.
  double bump_amp = 0.5;
  double bump_wavelength = 28.0;
  double detail_amp = 0.26;
  double detail_wavelength = 9.5;
  double fine_amp = 0.14;
  double fine_wavelength = 3.1;
  // Mound clutter (bushes, rocks): parabolic caps folded into the terrain
  // height, observed by both sensors; sharp local structure that penalizes
  // misregistration.
  double clutter_density = 0.09;  // mounds / m^2
  double clutter_radius_min = 0.8;
  double clutter_radius_max = 1.6;
  double clutter_height_min = 1.2;
  double clutter_height_max = 2.2;
  std::vector<BuildingSpec> buildings;
  std::vector<CanopySpec> canopies;

  double aerial_density = 4.5;         // pts/m^2, within the 2-8 acquisition range
  double ground_range = 55.0;          // m
  double ground_terrain_density = 0.95; // pts/m^2
  double ground_wall_density = 3.5;    // pts/m^2 on visible facades
  double canopy_density = 1.5;         // pts/m^2 top and underside
  double sensor_height = 1.7;          // m above terrain
  double ground_noise = 0.03;          // m, per coordinate
  double aerial_noise = 0.05;
  std::uint64_t rng_seed = 1;
};

/// Analytic scene: terrain function, boxes, canopy disks; plus the sampled
/// aerial cloud (terrain without building footprints, rooftops, canopy tops).
class World {
 public:
  explicit World(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }
  const PointCloud& aerial() const { return aerial_; }

  double terrain_z(double x, double y) const;
  double roof_z(const BuildingSpec& b) const;
  bool inside_footprint(double x, double y) const;
  /// Line-of-sight test against building boxes (endpoints excluded).
  bool segment_blocked(const Point3& a, const Point3& b) const;

 private:
  friend World generate_scene(const SceneSpec&);
  struct Mound {
    double x, y, radius, height;
  };
  SceneSpec spec_;
  double phase_[6] = {0, 0, 0, 0, 0, 0};  // per-scene octave phases
  std::vector<Mound> mounds_;
  // Coarse grid over the extent so terrain queries touch only nearby mounds.
  double cell_size_ = 8.0;
  int grid_nx_ = 0, grid_ny_ = 0;
  std::vector<std::vector<int>> mound_grid_;
  PointCloud aerial_;
};

World generate_scene(const SceneSpec& spec);

/// Ground scan in the scan frame defined by `pose` (scan -> site). Contains
/// visible terrain, sensor-facing facades, and canopy undersides; rooftops
/// above the sensor never appear. Throws if the sensor is inside a building.
PointCloud simulate_ground_scan(const World& world, const RigidTransform& pose, double range,
                                std::uint64_t stream);

enum class Protocol { A, B };

struct JitterSpec {
  double xy_range = 5.0;        // +/- m in x and y
  double yaw_range_deg = 15.0;  // +/- degrees
  std::uint64_t seed = 42;
  Protocol protocol = Protocol::B;
};

/// Crop + reference/init transforms + markers for one scan. Jitter draws
/// depend only on (jitter.seed, scan_index).
ScanPair make_pair(const World& world, const RigidTransform& pose, const JitterSpec& jitter,
                   int scan_index, const std::string& site);

struct TrajectorySpec {
  Eigen::Vector2d start{-25.0, 0.0};
  Eigen::Vector2d step{1.2, 0.0};  // per-scan displacement (keyframe spacing)
  int n_scans = 40;
  double odom_noise = 0.02;  // m per step
};

/// A linear pass through the scene with chained odometry.
std::vector<ScanPair> make_trajectory(const World& world, const TrajectorySpec& traj,
                                      const JitterSpec& jitter, const std::string& site,
                                      int id_offset = 0);

/// Scene presets. `campus`: mixed buildings + canopy, moderate coverage.
/// `high_overlap`: open terrain with low structures, forward coverage >= 0.6.
/// `facade_heavy`: tall courtyard walls close to the path, low forward coverage.
SceneSpec campus_scene(std::uint64_t seed);
SceneSpec high_overlap_scene(std::uint64_t seed);
SceneSpec facade_heavy_scene(std::uint64_t seed);
SceneSpec scene_by_name(const std::string& name, std::uint64_t seed);

}  // namespace rgsr::synth
