#include "rgsr/global_init.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace rgsr::global_init {

namespace {

std::int64_t voxel_key(const Point3& p, double inv_voxel) {
  // 21 bits per axis, biased; covers roughly +/-500 km at 0.5 m cells.
  const auto cell = [&](double v) {
    const std::int64_t c = static_cast<std::int64_t>(std::floor(v * inv_voxel)) + (1 << 20);
    if (c < 0 || c >= (1 << 21)) throw std::invalid_argument("voxel_downsample: coordinate out of range");
    return c;
  };
  return (cell(p.x()) << 42) | (cell(p.y()) << 21) | cell(p.z());
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (voxel <= 0.0) throw std::invalid_argument("voxel_downsample: voxel must be positive");
  const double inv = 1.0 / voxel;
  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
  };
  std::unordered_map<std::int64_t, int> slot;
  std::vector<Accum> cells;
  slot.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    const std::int64_t key = voxel_key(p, inv);
    auto [it, inserted] = slot.try_emplace(key, static_cast<int>(cells.size()));
    if (inserted) cells.emplace_back();
    Accum& a = cells[it->second];
    a.sum += p;
    a.count += 1;
  }
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cells.size());
  for (const Accum& a : cells) {
    out.points.push_back(a.sum / static_cast<double>(a.count));
  }
  return out;
}

std::vector<Point3> estimate_normals(const PointCloud& cloud, const NeighborIndex& index,
                                     double radius, std::vector<std::uint8_t>& valid) {
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());
  std::vector<Point3> normals(n, Point3::Zero());
  valid.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto nbrs = index.radius_search(cloud.points[i], radius);
    if (nbrs.size() < 5) continue;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int j : nbrs) mean += cloud.points[j];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : nbrs) {
      const Eigen::Vector3d d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Point3 normal = eig.eigenvectors().col(0);  // smallest eigenvalue
    // Gravity-aligned scenes: orient toward +z. Near-horizontal normals fall
    // back to a heading rule so the sign is not decided by rounding noise.
    constexpr double kHorizontalBand = 1e-9;
    bool flip = false;
    if (normal.z() < -kHorizontalBand) {
      flip = true;
    } else if (normal.z() <= kHorizontalBand) {
      if (normal.x() < -kHorizontalBand) {
        flip = true;
      } else if (normal.x() <= kHorizontalBand && normal.y() < 0.0) {
        flip = true;
      }
    }
    normals[i] = flip ? Point3(-normal) : normal;
    valid[i] = 1;
  }
  return normals;
}

namespace {

// Darboux-frame pair features (alpha, phi, theta) with the query point as
// source, binned into 3 x 11 histogram blocks.
inline void pair_features(const Point3& ps, const Point3& ns, const Point3& pt, const Point3& nt,
                          double& alpha, double& phi, double& theta) {
  Eigen::Vector3d d = pt - ps;
  const double dist = d.norm();
  d /= dist;
  const Eigen::Vector3d& u = ns;
  Eigen::Vector3d v = u.cross(d);
  const double vn = v.norm();
  if (vn < 1e-12) {
    v = Eigen::Vector3d(0, 0, 1).cross(u);
    if (v.norm() < 1e-12) v = Eigen::Vector3d(0, 1, 0);
  }
  v.normalize();
  const Eigen::Vector3d w = u.cross(v);
  alpha = v.dot(nt);
  phi = u.dot(d);
  theta = std::atan2(w.dot(nt), u.dot(nt));
}

inline int bin11(double value, double lo, double hi) {
  const int b = static_cast<int>(std::floor((value - lo) / (hi - lo) * 11.0));
  return std::clamp(b, 0, 10);
}

}  // namespace

std::vector<Descriptor> fpfh_descriptors(const PointCloud& keypoints, double feature_radius,
                                         std::vector<std::uint8_t>& valid) {
  const std::int64_t n = static_cast<std::int64_t>(keypoints.size());
  std::vector<Descriptor> descriptors(n, Descriptor{});
  if (n == 0) {
    valid.clear();
    return descriptors;
  }

  NeighborIndex index(keypoints);
  const std::vector<Point3> normals = estimate_normals(keypoints, index, feature_radius, valid);

  std::vector<std::vector<int>> neighborhoods(n);
  std::vector<Descriptor> spfh(n, Descriptor{});

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    auto nbrs = index.radius_search(keypoints.points[i], feature_radius);
    std::vector<int> kept;
    kept.reserve(nbrs.size());
    for (int j : nbrs) {
      if (j == i || !valid[j]) continue;
      if ((keypoints.points[i] - keypoints.points[j]).norm() < 1e-9) continue;
      kept.push_back(j);
    }
    neighborhoods[i] = std::move(kept);

    Descriptor& h = spfh[i];
    int count = 0;
    for (int j : neighborhoods[i]) {
      double alpha, phi, theta;
      pair_features(keypoints.points[i], normals[i], keypoints.points[j], normals[j], alpha, phi,
                    theta);
      h[bin11(alpha, -1.0, 1.0)] += 1.0;
      h[11 + bin11(phi, -1.0, 1.0)] += 1.0;
      h[22 + bin11(theta, -M_PI, M_PI)] += 1.0;
      ++count;
    }
    if (count > 0) {
      for (double& v : h) v *= 100.0 / static_cast<double>(count);
    }
  }

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    Descriptor& d = descriptors[i];
    d = spfh[i];
    double weight_sum = 0.0;
    Descriptor acc{};
    for (int j : neighborhoods[i]) {
      const double dist = (keypoints.points[i] - keypoints.points[j]).norm();
      if (dist <= 0.0) continue;
      const double w = 1.0 / dist;
      weight_sum += 1.0;
      for (int b = 0; b < kFpfhBins; ++b) acc[b] += w * spfh[j][b];
    }
    if (weight_sum > 0.0) {
      for (int b = 0; b < kFpfhBins; ++b) d[b] += acc[b] / weight_sum;
    }
  }
  return descriptors;
}

FeatureCloud fpfh(const PointCloud& cloud, const FpfhConfig& cfg) {
  FeatureCloud out;
  out.keypoints = voxel_downsample(cloud, cfg.voxel);
  out.descriptors = fpfh_descriptors(out.keypoints, cfg.feature_radius, out.valid);
  return out;
}

}  // namespace rgsr::global_init
