#include <cmath>

#include "doctest.h"
#include "hsn/theory.hpp"

using namespace hsn;

namespace {

double choose(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Miss probability averaged over the true block's starting rank r, written
// independently from the library: a queried true block stays in the top h
// unless the user rejects it and at least h of the r-1 blocks above it are
// accepted; an unqueried one drops below h when fewer than r-h of the t
// queried blocks are rejected.
double rank_average(int c, int t, int h, double p, double q) {
  auto tail = [](int n, int k, double s) {
    double total = 0.0;
    for (int j = std::max(k, 0); j <= n; ++j) total += choose(n, j) * std::pow(s, j) * std::pow(1 - s, n - j);
    return total;
  };
  double total = 0.0;
  for (int r = 1; r <= c; ++r) {
    if (r <= t)
      total += p + (1 - p) * tail(r - 1, h, q);
    else
      total += tail(t, h + t - r + 1, q);
  }
  return total / c;
}

}  // namespace

TEST_CASE("binomial distribution") {
  CHECK(binom_cdf(0, 2, 0.5) == doctest::Approx(0.25));
  CHECK(binom_cdf(1, 2, 0.5) == doctest::Approx(0.75));
  CHECK(binom_cdf(7, 7, 0.3) == 1.0);
  CHECK(binom_cdf(-1, 7, 0.3) == 0.0);
  CHECK(binom_cdf(2, 0, 0.3) == 1.0);
  for (int n : {1, 5, 40, 200})
    for (double p : {0.0, 0.03, 0.5, 0.97, 1.0}) {
      double running = 0.0;
      for (int i = 0; i <= n; ++i) {
        running += binom_pmf(i, n, p);
        CHECK(binom_cdf(i, n, p) == doctest::Approx(std::min(running, 1.0)).epsilon(1e-10));
      }
    }
}

TEST_CASE("closed forms at reference parameters") {
  CHECK(prob_oracle(50, 10, 5) == doctest::Approx(0.70));
  CHECK(prob_oracle(50, 45, 10) == 0.0);
  CHECK(prob_oracle(50, 1, 1) == doctest::Approx(0.96));
  CHECK(prob_fn_only(50, 10, 5, 0.2) == doctest::Approx(0.74));
  CHECK(prob_fn_only(50, 45, 10, 0.2) == doctest::Approx(0.18));
  CHECK(prob_general(50, 10, 20, 0.2, 0.1) == doctest::Approx(0.46));
  const double p = 0.2, q = 0.1;
  CHECK(prob_general_sum(50, 10, 20, p, q) == doctest::Approx(p * 10 / 50 + q * 10 / 50 + 1 - 30.0 / 50));
}

TEST_CASE("reductions between the user models") {
  for (int c : {5, 12, 50})
    for (int t = 1; t <= c; ++t)
      for (int h = 1; h <= c; ++h) {
        CHECK(prob_fn_only(c, t, h, 0.0) == doctest::Approx(prob_oracle(c, t, h)));
        CHECK(prob_general(c, t, h, 0.0, 0.0) == doctest::Approx(prob_oracle(c, t, h)));
        if (t <= h && t + h <= c) CHECK(prob_general(c, t, h, 0.3, 0.0) == doctest::Approx(prob_fn_only(c, t, h, 0.3)));
      }
}

TEST_CASE("closed forms agree with the rank sums and an independent oracle") {
  const double values[] = {0.0, 0.1, 0.35, 0.7, 1.0};
  for (int c : {7, 20, 50}) {
    const int ts[] = {1, 2, c / 3, c / 2, c};
    const int hs[] = {1, 3, c / 3, c - 2, c};
    for (int t : ts)
      for (int h : hs)
        for (double p : values)
          for (double q : values) {
            const double closed = prob_general(c, t, h, p, q);
            CHECK(std::abs(closed - prob_general_sum(c, t, h, p, q)) < 1e-12);
            CHECK(std::abs(closed - rank_average(c, t, h, p, q)) < 1e-10);
            CHECK(closed >= 0.0);
            CHECK(closed <= 1.0);
          }
  }
}

TEST_CASE("oracle supervision never hurts") {
  for (int h = 1; h < 50; ++h) {
    double previous = 2.0;
    for (int t = 1; t <= 50; ++t) {
      const double l = prob_general(50, t, h, 0.0, 0.0);
      CHECK(l <= previous + 1e-15);
      previous = l;
    }
  }
}

TEST_CASE("relative loss and heatmap") {
  CHECK(relative_loss(50, 10, 5, 0.0, 0.0) == doctest::Approx(-10.0 / 45.0));
  CHECK_THROWS_AS(relative_loss(50, 10, 50, 0.0, 0.0), std::invalid_argument);
  CHECK(relative_loss(50, 10, 5, 0.0, 1.0) == doctest::Approx(prob_general(50, 10, 5, 0.0, 1.0) / 0.9 - 1.0));
  const Eigen::MatrixXd grid = heatmap_grid(50, 0.0, 0.0);
  CHECK(grid.rows() == 49);
  for (int h = 1; h < 50; ++h)
    for (int t = 1; t < 50; ++t)
      if (t + h <= 50) CHECK(grid(h - 1, t - 1) <= 1e-15);
  const Eigen::MatrixXd noisy = heatmap_grid(50, 0.1, 0.1);
  CHECK(std::abs(noisy(9, 29) - noisy(29, 9)) > 1e-3);
  CHECK(noisy(9, 29) == doctest::Approx(relative_loss(50, 30, 10, 0.1, 0.1)));
  CHECK(heatmap_grid(50, 0.9, 0.9, true).maxCoeff() <= 1.0);
  CHECK(heatmap_grid(50, 0.9, 0.9).maxCoeff() > 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((TheoryParams{5, 6, 1, 0.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TheoryParams{5, 0, 1, 0.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TheoryParams{5, 2, 0, 0.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TheoryParams{5, 2, 1, 1.5, 0.0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((TheoryParams{5, 5, 9, 1.0, 1.0}.validate()));
}

TEST_CASE("simulation agrees with the closed forms") {
  auto within = [](const TheoryParams& params, std::int64_t reps, double target) {
    const McEstimate mc = mc_verify(params, reps, 11);
    CHECK(mc.reps == reps);
    CHECK(std::abs(mc.estimate - target) <= 3.0 * mc.standard_error + 1e-12);
  };
  within({50, 10, 5, 0.0, 0.0}, 100000, 0.70);
  within({50, 10, 20, 0.2, 0.1}, 1000000, 0.46);
  within({50, 20, 5, 0.1, 0.2}, 1000000, prob_general(50, 20, 5, 0.1, 0.2));
  const McEstimate edge = mc_verify({10, 4, 3, 1.0, 1.0}, 100000, 3);
  CHECK(edge.estimate >= 0.0);
  CHECK(edge.estimate <= 1.0);
  CHECK(std::abs(edge.estimate - prob_general(10, 4, 3, 1.0, 1.0)) <= 3.0 * edge.standard_error + 1e-12);
}

TEST_CASE("simulation is independent of the thread count") {
  const TheoryParams params{30, 8, 6, 0.2, 0.3};
  McOptions one, four;
  four.threads = 4;
  const McEstimate a = mc_verify(params, 20000, 5, one), b = mc_verify(params, 20000, 5, four);
  CHECK(a.misses == b.misses);
  McOptions wide;
  wide.total_blocks = 90;
  const McEstimate c = mc_verify(params, 20000, 5, wide);
  CHECK(std::abs(c.estimate - prob_general(30, 8, 6, 0.2, 0.3)) <= 3.0 * c.standard_error);
  wide.total_blocks = 30;
  CHECK_THROWS_AS(mc_verify(params, 10, 5, wide), std::invalid_argument);
}
