#pragma once

#include "rgsr/kdtree.hpp"
#include "rgsr/types.hpp"

#include <span>
#include <vector>

namespace rgsr::kernels {

// OpenMP-parallel inner loops. Parallel regions only fill per-index slots;
// every floating-point reduction downstream runs serially in index order, so
// results are bit-identical for any thread count. The *_serial twins are the
// reference implementations used by tests and the kernel benchmark.

void transform_points(const RigidTransform& t, std::span<const Point3> in,
                      std::vector<Point3>& out);
void transform_points_serial(const RigidTransform& t, std::span<const Point3> in,
                             std::vector<Point3>& out);

/// Nearest neighbor in `idx` of t(p) for every p in `pts`.
void batch_nearest(const NeighborIndex& idx, std::span<const Point3> pts,
                   const RigidTransform& t, std::vector<Neighbor>& out);
void batch_nearest_serial(const NeighborIndex& idx, std::span<const Point3> pts,
                          const RigidTransform& t, std::vector<Neighbor>& out);

/// Radius-bounded batch NN: entries whose true nearest neighbor lies beyond
/// max_dist come back as {-1, inf}; all others match batch_nearest exactly.
void batch_nearest_within(const NeighborIndex& idx, std::span<const Point3> pts,
                          const RigidTransform& t, double max_dist, std::vector<Neighbor>& out);
void batch_nearest_within_serial(const NeighborIndex& idx, std::span<const Point3> pts,
                                 const RigidTransform& t, double max_dist,
                                 std::vector<Neighbor>& out);

}  // namespace rgsr::kernels
