#include "hsn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsn/random.hpp"
#include "hsn/user.hpp"

namespace hsn {

void TheoryParams::validate() const {
  if (c < 1) throw std::invalid_argument("theory: c must be >= 1");
  if (t < 1 || t > c) throw std::invalid_argument("theory: t must lie in [1, c]");
  if (h < 1) throw std::invalid_argument("theory: h must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("theory: p must lie in [0, 1]");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("theory: q must lie in [0, 1]");
}

double binom_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return 0.0;
  // C(n, k) by the multiplicative formula; exact in doubles for the sizes used here.
  double coeff = 1.0;
  const int m = std::min(k, n - k);
  for (int j = 1; j <= m; ++j) coeff = coeff * static_cast<double>(n - m + j) / static_cast<double>(j);
  return coeff * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double binom_cdf(int i, int n, double p) {
  if (i < 0) return 0.0;
  if (i >= n) return 1.0;
  // Sum the shorter tail so the result keeps full relative accuracy.
  if (i < n / 2) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += binom_pmf(j, n, p);
    return std::min(1.0, s);
  }
  double upper = 0.0;
  for (int j = i + 1; j <= n; ++j) upper += binom_pmf(j, n, p);
  return std::max(0.0, 1.0 - upper);
}

double prob_oracle(int c, int t, int h) {
  TheoryParams{c, t, h, 0.0, 0.0}.validate();
  return std::max(1.0 - static_cast<double>(h + t) / c, 0.0);
}

double prob_fn_only(int c, int t, int h, double p) {
  TheoryParams{c, t, h, p, 0.0}.validate();
  const double cd = c;
  if (t + h <= c) return std::max(1.0 - h / cd - (1.0 - p) * t / cd, 0.0);
  return t * p / cd;
}

namespace {

double general_unclamped(int c, int t, int h, double p, double q) {
  const double cd = c;
  const double r = 1.0 - q;
  if (t <= h && t + h <= c) return 1.0 - h / cd - (1.0 - p - q) * t / cd;
  if (t <= h) {
    double s = 0.0;
    for (int i = 1; i <= c - h; ++i) s += binom_cdf(i - 1, t, r);
    return p * t / cd + s / cd;
  }
  double grow = 0.0;
  for (int i = 1; i <= t - h; ++i) grow += binom_cdf(i - 1, h + i - 1, r);
  double tail = 0.0;
  const int last = t + h <= c ? t : c - h;
  for (int i = t - h + 1; i <= last; ++i) tail += binom_cdf(i - 1, t, r);
  const double lead = t + h <= c ? 1.0 - h / cd - (1.0 - p) * t / cd : p * t / cd;
  return lead + (1.0 - p) / cd * grow + tail / cd;
}

}  // namespace

double prob_general(int c, int t, int h, double p, double q) {
  TheoryParams{c, t, h, p, q}.validate();
  return std::clamp(general_unclamped(c, t, h, p, q), 0.0, 1.0);
}

double prob_general_sum(int c, int t, int h, double p, double q) {
  TheoryParams{c, t, h, p, q}.validate();
  double total = 0.0;
  for (int rank = 1; rank <= c; ++rank) {
    double miss = 0.0;
    if (rank <= t) {
      // Queried: a 0 reply sends the block below every unqueried block; a 1
      // reply leaves it behind the earlier affirmative blocks only.
      double ahead_at_least_h = 0.0;
      for (int j = h; j <= rank - 1; ++j) ahead_at_least_h += binom_pmf(j, rank - 1, q);
      miss = p + (1.0 - p) * ahead_at_least_h;
    } else {
      // Unqueried: new rank is (affirmative count) + rank - t.
      for (int j = 0; j <= t; ++j)
        if (j + rank - t > h) miss += binom_pmf(j, t, q);
    }
    total += miss;
  }
  return std::clamp(total / c, 0.0, 1.0);
}

double relative_loss(int c, int t, int h, double p, double q) {
  if (h >= c) throw std::invalid_argument("relative_loss: h must be < c");
  const double base = 1.0 - static_cast<double>(h) / c;
  return (prob_general(c, t, h, p, q) - base) / base;
}

Eigen::MatrixXd heatmap_grid(int c, double p, double q, bool clip) {
  if (c < 2) throw std::invalid_argument("heatmap_grid: c must be >= 2");
  Eigen::MatrixXd grid(c - 1, c - 1);
  for (int h = 1; h < c; ++h)
    for (int t = 1; t < c; ++t) {
      const double r = relative_loss(c, t, h, p, q);
      grid(h - 1, t - 1) = clip ? std::min(r, 1.0) : r;
    }
  return grid;
}

namespace {

constexpr std::int64_t kChunk = 4096;

// Misses in one chunk of replicates. Block b's single vertex is b; the true
// block is whichever lands at a uniformly drawn rank among the top c.
std::int64_t simulate_chunk(const TheoryParams& params, int total_blocks, std::int64_t reps, Rng& rng) {
  Ranking ranking;
  ranking.blocks.resize(static_cast<std::size_t>(total_blocks));
  for (int b = 0; b < total_blocks; ++b) ranking.blocks[static_cast<std::size_t>(b)] = {b};
  ranking.order.resize(static_cast<std::size_t>(total_blocks));
  ranking.scores.assign(static_cast<std::size_t>(total_blocks), 0.0);
  const UserModel user{1.0 - params.p, params.q, params.t};
  std::int64_t misses = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    std::iota(ranking.order.begin(), ranking.order.end(), 0);
    std::shuffle(ranking.order.begin(), ranking.order.begin() + params.c, rng);
    // Blocks 0..c-1 are exchangeable; block 0 is the true one.
    UserQuery query = select_eta(ranking, params.t, 1, rng);
    query.replies = sample_user(query.eta, VertexSet{0}, user, rng);
    const std::vector<int> order = rerank_order(partition_labels(ranking, query));
    const auto pos = std::find(order.begin(), order.end(), 0) - order.begin();
    if (pos >= params.h) ++misses;
  }
  return misses;
}

}  // namespace

McEstimate mc_verify(const TheoryParams& params, std::int64_t reps, std::uint64_t seed, const McOptions& options) {
  params.validate();
  if (reps < 1) throw std::invalid_argument("mc_verify: reps must be >= 1");
  const int total = options.total_blocks == 0 ? 2 * params.c : options.total_blocks;
  if (total <= params.c) throw std::invalid_argument("mc_verify: total_blocks must exceed c");
  const auto chunks = static_cast<std::size_t>((reps + kChunk - 1) / kChunk);
  std::vector<std::int64_t> misses(chunks, 0);
  parallel_for(chunks, options.threads, [&](std::size_t k) {
    Rng rng = make_rng(seed, k);
    const std::int64_t n = std::min<std::int64_t>(kChunk, reps - static_cast<std::int64_t>(k) * kChunk);
    misses[k] = simulate_chunk(params, total, n, rng);
  });
  McEstimate out;
  out.reps = reps;
  out.misses = std::accumulate(misses.begin(), misses.end(), std::int64_t{0});
  out.estimate = static_cast<double>(out.misses) / static_cast<double>(reps);
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
  return out;
}

}  // namespace hsn
