#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace rgsr::stats {

/// splitmix64 finalizer; the basis for all derived RNG streams.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic stream seed from (seed, a, b); adding streams never perturbs others.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

/// Small self-contained generator so draws are pinned bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal(double mean, double sigma);
  int uniform_int(int lo, int hi);  // inclusive bounds

 private:
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Nearest-rank quantile: the ceil(p/100 * n)-th smallest value. p in (0, 100].
double nearest_rank_quantile(std::vector<double> values, double p);

/// Median; even counts average the two central order statistics.
double median(std::vector<double> values);

struct SpearmanResult {
  double rho;
  double p_value;  // two-sided, Student-t approximation
  int n;
};

/// Spearman rank correlation with average ranks for ties.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Regularized incomplete beta I_x(a, b); used for the Student-t tail.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student-t statistic with df degrees of freedom.
double student_t_two_sided(double t, double df);

}  // namespace rgsr::stats
