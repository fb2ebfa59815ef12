#pragma once

#include "rgsr/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace rgsr::fm_bev {

/// Multi-channel BEV occupancy raster: three height bands split at the 33rd
/// and 67th z-quantiles of the rasterized cloud.
struct BevGrid {
  static constexpr int kSize = 200;        // cells per side
  static constexpr int kBands = 3;
  static constexpr double kResolution = 0.5;  // m / pixel

  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // world xy of cell (0,0) corner
  std::array<double, 2> band_edges{0.0, 0.0};        // ascending z-quantiles
  std::vector<double> cells;  // kBands * kSize * kSize, [band][iy][ix], 0 or 1

  double& at(int band, int iy, int ix) { return cells[(band * kSize + iy) * kSize + ix]; }
  double at(int band, int iy, int ix) const { return cells[(band * kSize + iy) * kSize + ix]; }
  double occupancy() const;
};

/// Rasterize the cloud around `center` (100 m window). Each point lands in one
/// cell of one band; points outside the window are dropped.
BevGrid rasterize_bev(const PointCloud& cloud, const Eigen::Vector2d& center);

/// Yaw angles (radians, |yaw| <= 30 deg) that best carry src onto dst, from
/// log-polar phase correlation of the magnitude spectra. At most 3, strongest
/// first. Positive yaw is counterclockwise about +z.
std::vector<double> fm_rotation_candidates(const BevGrid& src, const BevGrid& dst);

struct Shift2d {
  double tx = 0.0;  // meters to apply to src content
  double ty = 0.0;
  double score = 0.0;
};

/// Planar shifts that best carry (already rotated) src onto dst, from spatial
/// phase correlation summed over bands. At most 5, strongest first.
std::vector<Shift2d> fm_translation_candidates(const BevGrid& src_rotated, const BevGrid& dst);

/// SE(2) pose delta in world coordinates (about the origin).
struct Se2Hypothesis {
  double yaw = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double score = 0.0;
};

/// Compose the delta onto base: yaw about world z then planar translation;
/// base's z, roll and pitch survive.
RigidTransform lift_to_se3(const Se2Hypothesis& h, const RigidTransform& base);

/// Recover the (yaw, tx, ty) delta between a lifted transform and its base.
Se2Hypothesis extract_se2(const RigidTransform& lifted, const RigidTransform& base);

/// Full spectral proposal stage: <= 15 hypotheses (3 yaw x 5 shifts) carrying
/// the aligned source cloud onto the target, converted to origin form so they
/// can be lifted onto the transform that produced `src_aligned`.
std::vector<Se2Hypothesis> fm_propose(const PointCloud& src_aligned, const PointCloud& dst,
                                      const Eigen::Vector2d& center);

/// Debug dump: magic "RGSRGRD1", three uint32 dims, row-major float32 values.
void write_grid_dump(const std::string& path, const BevGrid& grid);

}  // namespace rgsr::fm_bev
