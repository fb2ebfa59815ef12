#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace rgsr {

using Point3 = Eigen::Vector3d;

/// Unordered set of 3D points in meters plus a frame tag ("scan", "aerial", ...).
struct PointCloud {
  std::vector<Point3> points;
  std::string frame;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts, std::string frame_label = {})
      : points(std::move(pts)), frame(std::move(frame_label)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// SE(3) pose: p -> rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform translate(const Eigen::Vector3d& t) {
    RigidTransform out;
    out.translation = t;
    return out;
  }

  /// Rotation by `yaw` radians about the world z axis through the origin.
  static RigidTransform from_yaw(double yaw) {
    RigidTransform out;
    const double c = std::cos(yaw), s = std::sin(yaw);
    out.rotation << c, -s, 0, s, c, 0, 0, 0, 1;
    return out;
  }

  /// Rotation by `yaw` about the vertical axis through `center` (z, roll, pitch untouched).
  static RigidTransform yaw_about(double yaw, const Eigen::Vector3d& center) {
    RigidTransform r = from_yaw(yaw);
    r.translation = center - r.rotation * center;
    return r;
  }

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }

  /// Composition: (a * b)(p) == a(b(p)).
  RigidTransform operator*(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
  }

  /// Projects the rotation back onto SO(3); call after long composition chains.
  void orthonormalize() {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
      Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
      flip(2, 2) = -1.0;
      r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    rotation = r;
  }

  /// Total rotation angle in radians (axis-angle magnitude).
  double rotation_angle() const {
    const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
    return std::acos(c);
  }

  double yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    RigidTransform out;
    out.rotation = m.topLeftCorner<3, 3>();
    out.translation = m.topRightCorner<3, 1>();
    return out;
  }
};

inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
inline RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

/// A point surveyed in the aerial frame paired with the same point in the scan frame.
struct SurveyMarker {
  Point3 aerial;
  Point3 scan;
};
using SurveyMarkers = std::vector<SurveyMarker>;

}  // namespace rgsr
