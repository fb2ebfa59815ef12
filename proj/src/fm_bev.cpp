#include "rgsr/fm_bev.hpp"

#include "fourier.hpp"
#include "rgsr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rgsr::fm_bev {

namespace {

constexpr int kThetaBins = 360;  // 0.5 deg per bin over [0, 180)
constexpr int kRadialBins = 64;
constexpr double kRadiusMin = 2.0;
constexpr double kYawWindowBins = 60;  // +/- 30 deg
constexpr int kPeakSuppression = 2;

double bilinear(const std::vector<double>& img, int rows, int cols, double r, double c) {
  if (r < 0.0 || c < 0.0 || r > rows - 1 || c > cols - 1) return 0.0;
  const int r0 = static_cast<int>(r), c0 = static_cast<int>(c);
  const int r1 = std::min(r0 + 1, rows - 1), c1 = std::min(c0 + 1, cols - 1);
  const double fr = r - r0, fc = c - c0;
  const double v00 = img[static_cast<std::size_t>(r0) * cols + c0];
  const double v01 = img[static_cast<std::size_t>(r0) * cols + c1];
  const double v10 = img[static_cast<std::size_t>(r1) * cols + c0];
  const double v11 = img[static_cast<std::size_t>(r1) * cols + c1];
  return v00 * (1 - fr) * (1 - fc) + v01 * (1 - fr) * fc + v10 * fr * (1 - fc) + v11 * fr * fc;
}

// Log-polar resampling of an fftshift-ed magnitude image: rows = angle over
// [0, 180), cols = log radius up to Nyquist.
std::vector<double> log_polar(const std::vector<double>& mag, int size) {
  std::vector<double> out(static_cast<std::size_t>(kThetaBins) * kRadialBins, 0.0);
  const double cy = size / 2, cx = size / 2;
  const double r_max = size / 2.0;
  const double dlog = std::log(r_max / kRadiusMin) / (kRadialBins - 1);
  for (int t = 0; t < kThetaBins; ++t) {
    const double ang = M_PI * static_cast<double>(t) / kThetaBins;
    const double sa = std::sin(ang), ca = std::cos(ang);
    for (int k = 0; k < kRadialBins; ++k) {
      const double r = kRadiusMin * std::exp(k * dlog);
      out[static_cast<std::size_t>(t) * kRadialBins + k] =
          bilinear(mag, size, size, cy + r * sa, cx + r * ca);
    }
  }
  return out;
}

std::vector<double> band_image(const BevGrid& g, int band) {
  std::vector<double> img(static_cast<std::size_t>(BevGrid::kSize) * BevGrid::kSize);
  for (int r = 0; r < BevGrid::kSize; ++r) {
    for (int c = 0; c < BevGrid::kSize; ++c) {
      img[static_cast<std::size_t>(r) * BevGrid::kSize + c] = g.at(band, r, c);
    }
  }
  return img;
}

// Log compression plus the classic (1-X)(2-X) high-pass over the shifted
// spectrum; suppresses the DC blob that smears angular localization.
void emphasize_spectrum(std::vector<double>& mag, int size) {
  for (int r = 0; r < size; ++r) {
    const double eta = (static_cast<double>(r) - size / 2) / static_cast<double>(size);
    for (int c = 0; c < size; ++c) {
      const double xi = (static_cast<double>(c) - size / 2) / static_cast<double>(size);
      const double x = std::cos(M_PI * xi) * std::cos(M_PI * eta);
      const double h = (1.0 - x) * (2.0 - x);
      double& v = mag[static_cast<std::size_t>(r) * size + c];
      v = std::log1p(v) * h;
    }
  }
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

double BevGrid::occupancy() const {
  double s = 0.0;
  for (double v : cells) s += v;
  return s;
}

BevGrid rasterize_bev(const PointCloud& cloud, const Eigen::Vector2d& center) {
  if (cloud.empty()) throw std::invalid_argument("rasterize_bev: empty cloud");
  BevGrid g;
  const double half = BevGrid::kSize * BevGrid::kResolution / 2.0;
  g.origin = center - Eigen::Vector2d(half, half);
  g.cells.assign(static_cast<std::size_t>(BevGrid::kBands) * BevGrid::kSize * BevGrid::kSize, 0.0);

  // Band edges from the points inside the window (what actually rasterizes).
  std::vector<double> zs;
  std::vector<std::array<int, 2>> cells;
  zs.reserve(cloud.size());
  cells.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    const int ix = static_cast<int>(std::floor((p.x() - g.origin.x()) / BevGrid::kResolution));
    const int iy = static_cast<int>(std::floor((p.y() - g.origin.y()) / BevGrid::kResolution));
    if (ix < 0 || ix >= BevGrid::kSize || iy < 0 || iy >= BevGrid::kSize) continue;
    zs.push_back(p.z());
    cells.push_back({iy, ix});
  }
  if (zs.empty()) return g;
  g.band_edges[0] = stats::nearest_rank_quantile(zs, 33.0);
  g.band_edges[1] = stats::nearest_rank_quantile(zs, 67.0);

  for (std::size_t i = 0; i < zs.size(); ++i) {
    const int band = zs[i] <= g.band_edges[0] ? 0 : (zs[i] <= g.band_edges[1] ? 1 : 2);
    g.at(band, cells[i][0], cells[i][1]) = 1.0;
  }
  return g;
}

std::vector<double> fm_rotation_candidates(const BevGrid& src, const BevGrid& dst) {
  if (src.occupancy() == 0.0 || dst.occupancy() == 0.0) return {};

  std::vector<double> sum(static_cast<std::size_t>(kThetaBins) * kRadialBins, 0.0);
  for (int b = 0; b < BevGrid::kBands; ++b) {
    std::vector<double> is = band_image(src, b);
    std::vector<double> id = band_image(dst, b);
    detail::window_image(is, BevGrid::kSize, BevGrid::kSize);
    detail::window_image(id, BevGrid::kSize, BevGrid::kSize);
    std::vector<double> ms = detail::magnitude_spectrum(is, BevGrid::kSize, BevGrid::kSize);
    std::vector<double> md = detail::magnitude_spectrum(id, BevGrid::kSize, BevGrid::kSize);
    emphasize_spectrum(ms, BevGrid::kSize);
    emphasize_spectrum(md, BevGrid::kSize);
    std::vector<double> ls = log_polar(ms, BevGrid::kSize);
    std::vector<double> ld = log_polar(md, BevGrid::kSize);
    // Radial axis is aperiodic; window it. The angle axis is circular.
    detail::window_image(ls, kThetaBins, kRadialBins, false, true);
    detail::window_image(ld, kThetaBins, kRadialBins, false, true);
    const std::vector<double> surf = detail::phase_correlation(ld, ls, kThetaBins, kRadialBins);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += surf[i];
  }

  // Angular score: best correlation over small log-scale shifts (scale is
  // fixed at 1 for rigid motion).
  std::vector<double> score(kThetaBins, 0.0);
  for (int a = 0; a < kThetaBins; ++a) {
    double best = -std::numeric_limits<double>::infinity();
    for (int dr = -2; dr <= 2; ++dr) {
      const int col = wrap_index(dr, kRadialBins);
      best = std::max(best, sum[static_cast<std::size_t>(a) * kRadialBins + col]);
    }
    score[a] = best;
  }

  std::vector<int> window_bins;
  for (int s = -static_cast<int>(kYawWindowBins); s <= static_cast<int>(kYawWindowBins); ++s) {
    window_bins.push_back(s);
  }
  std::vector<char> suppressed(kThetaBins, 0);
  std::vector<double> yaws;
  while (yaws.size() < 3) {
    double best = -std::numeric_limits<double>::infinity();
    int best_shift = 0;
    bool found = false;
    for (int s : window_bins) {
      const int a = wrap_index(s, kThetaBins);
      if (suppressed[a]) continue;
      if (score[a] > best) {
        best = score[a];
        best_shift = s;
        found = true;
      }
    }
    if (!found) break;
    yaws.push_back(static_cast<double>(best_shift) * (M_PI / kThetaBins));
    for (int d = -kPeakSuppression; d <= kPeakSuppression; ++d) {
      suppressed[wrap_index(best_shift + d, kThetaBins)] = 1;
    }
  }
  return yaws;
}

std::vector<Shift2d> fm_translation_candidates(const BevGrid& src_rotated, const BevGrid& dst) {
  if (src_rotated.occupancy() == 0.0 || dst.occupancy() == 0.0) return {};
  constexpr int n = BevGrid::kSize;

  std::vector<double> sum(static_cast<std::size_t>(n) * n, 0.0);
  for (int b = 0; b < BevGrid::kBands; ++b) {
    std::vector<double> is = band_image(src_rotated, b);
    std::vector<double> id = band_image(dst, b);
    detail::window_image(is, n, n);
    detail::window_image(id, n, n);
    const std::vector<double> surf = detail::phase_correlation(id, is, n, n);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += surf[i];
  }

  std::vector<Shift2d> out;
  std::vector<double> work = sum;
  while (out.size() < 5) {
    double best = -std::numeric_limits<double>::infinity();
    int best_r = -1, best_c = -1;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double v = work[static_cast<std::size_t>(r) * n + c];
        if (v > best) {
          best = v;
          best_r = r;
          best_c = c;
        }
      }
    }
    if (best_r < 0 || best == -std::numeric_limits<double>::infinity()) break;
    const int sy = best_r > n / 2 ? best_r - n : best_r;
    const int sx = best_c > n / 2 ? best_c - n : best_c;
    out.push_back({sx * BevGrid::kResolution, sy * BevGrid::kResolution, best});
    for (int dr = -kPeakSuppression; dr <= kPeakSuppression; ++dr) {
      for (int dc = -kPeakSuppression; dc <= kPeakSuppression; ++dc) {
        work[static_cast<std::size_t>(wrap_index(best_r + dr, n)) * n + wrap_index(best_c + dc, n)] =
            -std::numeric_limits<double>::infinity();
      }
    }
  }
  return out;
}

RigidTransform lift_to_se3(const Se2Hypothesis& h, const RigidTransform& base) {
  RigidTransform delta = RigidTransform::from_yaw(h.yaw);
  delta.translation = Eigen::Vector3d(h.tx, h.ty, 0.0);
  return delta * base;
}

Se2Hypothesis extract_se2(const RigidTransform& lifted, const RigidTransform& base) {
  const RigidTransform delta = lifted * base.inverse();
  Se2Hypothesis h;
  h.yaw = delta.yaw();
  h.tx = delta.translation.x();
  h.ty = delta.translation.y();
  return h;
}

std::vector<Se2Hypothesis> fm_propose(const PointCloud& src_aligned, const PointCloud& dst,
                                      const Eigen::Vector2d& center) {
  const BevGrid g_dst = rasterize_bev(dst, center);
  const BevGrid g_src = rasterize_bev(src_aligned, center);
  const std::vector<double> yaws = fm_rotation_candidates(g_src, g_dst);

  const Eigen::Vector3d c3(center.x(), center.y(), 0.0);
  std::vector<Se2Hypothesis> out;
  for (double yaw : yaws) {
    const RigidTransform rot = RigidTransform::yaw_about(yaw, c3);
    PointCloud rotated;
    rotated.frame = src_aligned.frame;
    rotated.points.reserve(src_aligned.size());
    for (const Point3& p : src_aligned.points) rotated.points.push_back(rot(p));
    const BevGrid g_rot = rasterize_bev(rotated, center);
    for (const Shift2d& s : fm_translation_candidates(g_rot, g_dst)) {
      // About-center yaw plus shift, expressed about the origin.
      const RigidTransform delta = RigidTransform::translate({s.tx, s.ty, 0.0}) * rot;
      Se2Hypothesis h;
      h.yaw = yaw;
      h.tx = delta.translation.x();
      h.ty = delta.translation.y();
      h.score = s.score;
      out.push_back(h);
    }
  }
  return out;  // <= 3 * 5
}

void write_grid_dump(const std::string& path, const BevGrid& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_grid_dump: cannot open " + path);
  const char magic[8] = {'R', 'G', 'S', 'R', 'G', 'R', 'D', '1'};
  f.write(magic, 8);
  const std::uint32_t dims[3] = {BevGrid::kBands, BevGrid::kSize, BevGrid::kSize};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (double v : grid.cells) {
    const float x = static_cast<float>(v);
    f.write(reinterpret_cast<const char*>(&x), sizeof(x));
  }
}

}  // namespace rgsr::fm_bev
