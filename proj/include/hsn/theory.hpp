#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace hsn {

/// Parameters of the single-interesting-block setting: c indistinguishable
/// sibling blocks occupy ranks 1..c in uniform random order, a capacity-t
/// user queries one vertex from each of ranks 1..t, and the event of
/// interest is the true block ending below rank h. p = 1 - theta, q = gamma.
struct TheoryParams {
  int c = 0;
  int t = 0;
  int h = 0;
  double p = 0.0;
  double q = 0.0;

  /// Throws std::invalid_argument unless 1 <= t <= c, h >= 1, p, q in [0, 1].
  void validate() const;
};

/// P(X <= i) for X ~ Binomial(n, p). 0 for i < 0, 1 for i >= n.
double binom_cdf(int i, int n, double p);
double binom_pmf(int k, int n, double p);

double prob_oracle(int c, int t, int h);
double prob_fn_only(int c, int t, int h, double p);
/// Closed form, dispatching on (t <= h) x (t + h <= c).
double prob_general(int c, int t, int h, double p, double q);
/// Same probability as the average over the true block's initial rank of
/// the conditional miss probability, with explicit binomial sums.
double prob_general_sum(int c, int t, int h, double p, double q);

/// (L - (1 - h/c)) / (1 - h/c). Throws std::invalid_argument when h >= c.
double relative_loss(int c, int t, int h, double p, double q);

/// (c-1) x (c-1) matrix with entry (h-1, t-1) = relative_loss(c, t, h, p, q),
/// optionally capped at 1.
Eigen::MatrixXd heatmap_grid(int c, double p, double q, bool clip = false);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t reps = 0;
  std::int64_t misses = 0;
};

struct McOptions {
  /// Total blocks at the level; 0 means 2c. Must exceed c.
  int total_blocks = 0;
  unsigned threads = 1;
};

/// Monte Carlo estimate of P(E_h) by simulating the shuffle, the user's
/// replies and the I/M/N re-ranking. Independent of the thread count.
McEstimate mc_verify(const TheoryParams& params, std::int64_t reps, std::uint64_t seed, const McOptions& options = {});

}  // namespace hsn
