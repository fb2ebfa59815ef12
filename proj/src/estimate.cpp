#include "rgsr/estimate.hpp"

#include <stdexcept>

namespace rgsr {

std::optional<RigidTransform> try_estimate_rigid(std::span<const Point3> src,
                                                 std::span<const Point3> dst) {
  const std::size_t n = src.size();
  if (n < 3 || dst.size() != n) return std::nullopt;

  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(n);
  cd /= static_cast<double>(n);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (src[i] - cs) * (dst[i] - cd).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Rank <= 1 leaves a rotation about the common line unconstrained.
  if (sv(1) <= sv(0) * 1e-12 || sv(0) <= 0.0) return std::nullopt;

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform out;
  out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation = cd - out.rotation * cs;
  return out;
}

RigidTransform estimate_rigid(std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("estimate_rigid: length mismatch");
  if (src.size() < 3) throw std::invalid_argument("estimate_rigid: need at least 3 pairs");
  auto t = try_estimate_rigid(src, dst);
  if (!t) throw std::runtime_error("estimate_rigid: degenerate correspondence configuration");
  return *t;
}

}  // namespace rgsr
