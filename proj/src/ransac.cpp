#include "rgsr/global_init.hpp"

#include "rgsr/estimate.hpp"
#include "rgsr/stats.hpp"

#include <algorithm>
#include <cmath>

namespace rgsr::global_init {

namespace {

struct Corr {
  Point3 src;
  Point3 dst;
};

// Stride-subsampled indices of matchable (valid) keypoints.
std::vector<int> matchable(const FeatureCloud& fc, int cap) {
  std::vector<int> all;
  for (int i = 0; i < static_cast<int>(fc.keypoints.size()); ++i) {
    if (fc.valid[i]) all.push_back(i);
  }
  if (static_cast<int>(all.size()) <= cap) return all;
  const int stride = (static_cast<int>(all.size()) + cap - 1) / cap;
  std::vector<int> out;
  for (std::size_t k = 0; k < all.size(); k += stride) out.push_back(all[k]);
  return out;
}

double desc_dist2(const Descriptor& a, const Descriptor& b) {
  double s = 0.0;
  for (int i = 0; i < kFpfhBins; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<int> nearest_descriptor(const FeatureCloud& from, const std::vector<int>& from_ids,
                                    const FeatureCloud& to, const std::vector<int>& to_ids) {
  std::vector<int> best(from_ids.size(), -1);
  const std::int64_t n = static_cast<std::int64_t>(from_ids.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double best_d = std::numeric_limits<double>::infinity();
    int best_j = -1;
    const Descriptor& d = from.descriptors[from_ids[i]];
    for (std::size_t j = 0; j < to_ids.size(); ++j) {
      const double dist = desc_dist2(d, to.descriptors[to_ids[j]]);
      if (dist < best_d) {
        best_d = dist;
        best_j = static_cast<int>(j);
      }
    }
    best[i] = best_j;
  }
  return best;
}

bool edge_check(const Corr& a, const Corr& b, double similarity = 0.9) {
  const double ds = (a.src - b.src).norm();
  const double dd = (a.dst - b.dst).norm();
  if (ds < 0.05 || dd < 0.05) return false;
  return ds > dd * similarity && dd > ds * similarity;
}

}  // namespace

RansacResult ransac_register(const FeatureCloud& src, const FeatureCloud& dst,
                             const FpfhConfig& cfg) {
  RansacResult out;

  const std::vector<int> src_ids = matchable(src, cfg.max_match_points);
  const std::vector<int> dst_ids = matchable(dst, cfg.max_match_points);
  if (src_ids.size() < 3 || dst_ids.size() < 3) return out;

  // Mutual nearest descriptor matches.
  const std::vector<int> fwd = nearest_descriptor(src, src_ids, dst, dst_ids);
  const std::vector<int> bwd = nearest_descriptor(dst, dst_ids, src, src_ids);
  std::vector<Corr> corrs;
  for (std::size_t i = 0; i < src_ids.size(); ++i) {
    const int j = fwd[i];
    if (j >= 0 && bwd[j] == static_cast<int>(i)) {
      corrs.push_back({src.keypoints.points[src_ids[i]], dst.keypoints.points[dst_ids[j]]});
    }
  }
  if (corrs.size() < 3) return out;

  // Scoring subset keeps per-hypothesis cost bounded.
  std::vector<const Corr*> score_set;
  {
    const int stride =
        std::max<int>(1, static_cast<int>((corrs.size() + cfg.max_score_corrs - 1) / cfg.max_score_corrs));
    for (std::size_t i = 0; i < corrs.size(); i += stride) score_set.push_back(&corrs[i]);
  }
  const double max_corr2 = cfg.max_corr * cfg.max_corr;

  const std::int64_t budget =
      std::min<std::int64_t>(cfg.ransac_iterations, cfg.max_hypothesis_evals);
  constexpr std::int64_t kChunk = 4096;

  struct Hyp {
    int inliers = -1;
    RigidTransform transform;
  };

  int best_count = -1;
  std::int64_t best_k = -1;
  RigidTransform best_t;
  std::int64_t evaluated = 0;

  std::vector<Hyp> chunk(static_cast<std::size_t>(kChunk));
  while (evaluated < budget) {
    const std::int64_t chunk_n = std::min<std::int64_t>(kChunk, budget - evaluated);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunk_n; ++c) {
      const std::int64_t k = evaluated + c;
      Hyp& h = chunk[c];
      h.inliers = -1;
      stats::Rng rng(stats::stream_seed(cfg.rng_seed, static_cast<std::uint64_t>(k)));
      const int n = static_cast<int>(corrs.size());
      int a = rng.uniform_int(0, n - 1);
      int b = rng.uniform_int(0, n - 1);
      int d = rng.uniform_int(0, n - 1);
      if (a == b || b == d || a == d) continue;
      if (!edge_check(corrs[a], corrs[b]) || !edge_check(corrs[a], corrs[d]) ||
          !edge_check(corrs[b], corrs[d])) {
        continue;
      }
      const std::array<Point3, 3> s{corrs[a].src, corrs[b].src, corrs[d].src};
      const std::array<Point3, 3> t{corrs[a].dst, corrs[b].dst, corrs[d].dst};
      const auto est = try_estimate_rigid(s, t);
      if (!est) continue;
      int count = 0;
      for (const Corr* corr : score_set) {
        if (((*est)(corr->src) - corr->dst).squaredNorm() <= max_corr2) ++count;
      }
      h.inliers = count;
      h.transform = *est;
    }
    // Serial reduction in hypothesis order keeps the winner deterministic.
    for (std::int64_t c = 0; c < chunk_n; ++c) {
      if (chunk[c].inliers > best_count) {
        best_count = chunk[c].inliers;
        best_k = evaluated + c;
        best_t = chunk[c].transform;
      }
    }
    evaluated += chunk_n;

    if (best_count >= 3) {
      const double w =
          static_cast<double>(best_count) / static_cast<double>(score_set.size());
      if (w >= 1.0) break;
      const double denom = std::log1p(-std::min(0.999999, w * w * w));
      const double needed = std::log1p(-cfg.confidence) / denom;
      if (static_cast<double>(evaluated) >= needed) break;
    }
  }
  out.evaluated = evaluated;
  (void)best_k;

  if (best_count < 3) return out;

  // Refit on all correspondence inliers of the winning hypothesis.
  RigidTransform refined = best_t;
  int final_inliers = best_count;
  for (int round = 0; round < 3; ++round) {
    std::vector<Point3> s, t;
    for (const Corr& corr : corrs) {
      if ((refined(corr.src) - corr.dst).squaredNorm() <= max_corr2) {
        s.push_back(corr.src);
        t.push_back(corr.dst);
      }
    }
    if (s.size() < 3) break;
    const auto est = try_estimate_rigid(s, t);
    if (!est) break;
    refined = *est;
    final_inliers = static_cast<int>(s.size());
  }

  out.transform = refined;
  out.inliers = final_inliers;
  out.success = true;
  return out;
}

}  // namespace rgsr::global_init
