#include "rgsr/kernels.hpp"

namespace rgsr::kernels {

void transform_points(const RigidTransform& t, std::span<const Point3> in,
                      std::vector<Point3>& out) {
  out.resize(in.size());
  const std::int64_t n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = t.rotation * in[i] + t.translation;
  }
}

void transform_points_serial(const RigidTransform& t, std::span<const Point3> in,
                             std::vector<Point3>& out) {
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = t.rotation * in[i] + t.translation;
  }
}

void batch_nearest(const NeighborIndex& idx, std::span<const Point3> pts,
                   const RigidTransform& t, std::vector<Neighbor>& out) {
  out.resize(pts.size());
  const std::int64_t n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = idx.nearest(t.rotation * pts[i] + t.translation);
  }
}

void batch_nearest_serial(const NeighborIndex& idx, std::span<const Point3> pts,
                          const RigidTransform& t, std::vector<Neighbor>& out) {
  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i] = idx.nearest(t.rotation * pts[i] + t.translation);
  }
}

}  // namespace rgsr::kernels

namespace rgsr::kernels {

void batch_nearest_within(const NeighborIndex& idx, std::span<const Point3> pts,
                          const RigidTransform& t, double max_dist, std::vector<Neighbor>& out) {
  out.resize(pts.size());
  const std::int64_t n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = idx.nearest_within(t.rotation * pts[i] + t.translation, max_dist);
  }
}

void batch_nearest_within_serial(const NeighborIndex& idx, std::span<const Point3> pts,
                                 const RigidTransform& t, double max_dist,
                                 std::vector<Neighbor>& out) {
  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i] = idx.nearest_within(t.rotation * pts[i] + t.translation, max_dist);
  }
}

}  // namespace rgsr::kernels
