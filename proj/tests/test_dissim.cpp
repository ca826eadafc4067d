#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hsn/assignment.hpp"
#include "hsn/dissim.hpp"
#include "hsn/random.hpp"

using namespace hsn;

namespace {

Eigen::MatrixXd adjacency(int n, std::initializer_list<std::pair<int, int>> pairs) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : pairs) a(u, v) = a(v, u) = 1.0;
  return a;
}

Eigen::MatrixXd random_graph(int n, double p, Rng& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) a(i, j) = a(j, i) = 1.0;
  return a;
}

Eigen::MatrixXd permuted(const Eigen::MatrixXd& a, const std::vector<int>& perm) {
  const auto n = a.rows();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = a(i, j);
  return b;
}

// Minimum and mean of the matching cost over every permutation.
std::pair<double, double> enumerate_costs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<int> perm(static_cast<std::size_t>(a.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double lo = std::numeric_limits<double>::infinity(), sum = 0.0, count = 0.0;
  do {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.rows(); ++j) {
        const double diff = a(i, j) - b(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        cost += diff * diff;
      }
    lo = std::min(lo, cost);
    sum += cost;
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {lo, sum / count};
}

}  // namespace

TEST_CASE("padding") {
  const Eigen::MatrixXd edge = adjacency(2, {{0, 1}});
  CHECK(pad(edge, 2) == edge);
  const Eigen::MatrixXd padded = pad(edge, 4);
  CHECK(padded.rows() == 4);
  CHECK(padded.sum() == 2.0);
  CHECK(padded(0, 1) == 1.0);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  expected(0, 1) = expected(1, 0) = -1.0;
  CHECK(pad(Eigen::MatrixXd::Zero(2, 2), 3, PadMode::kCentered) == expected);
  CHECK_THROWS_AS(pad(edge, 1), std::invalid_argument);
}

TEST_CASE("linear assignment matches enumeration") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = std::floor(10.0 * uniform01(rng));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = solve_assignment(cost);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, got[static_cast<std::size_t>(i)]);
    CHECK(total == doctest::Approx(best));
  }
}

TEST_CASE("exact matching on small graphs") {
  const Eigen::MatrixXd p3 = adjacency(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd k3 = adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
  const MatchResult m = gm_min_exact(p3, k3);
  CHECK(m.value == 2.0);
  CHECK(match_cost(p3, k3, m.permutation) == 2.0);
  CHECK(gm_min_exact(p3, permuted(p3, {2, 0, 1})).value == 0.0);
  CHECK(gm_min_exact(p3, p3).value <= match_cost(p3, p3, {0, 1, 2}));
  CHECK_THROWS_AS(gm_min_exact(Eigen::MatrixXd::Zero(9, 9), Eigen::MatrixXd::Zero(9, 9)), std::invalid_argument);
}

TEST_CASE("permutation mean in closed form") {
  const Eigen::MatrixXd p3 = adjacency(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd k3 = adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(gm_expected(k3, k3) == 0.0);
  CHECK(gm_expected(p3, p3) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(gm_expected(Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4)) == 0.0);
  CHECK_THROWS_AS(gm_expected(p3, Eigen::MatrixXd::Zero(4, 4)), std::invalid_argument);
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd a = random_graph(n, 0.5, rng), b = random_graph(n, 0.4, rng);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (a(i, j) > 0) a(i, j) = a(j, i) = 1.0 + std::floor(3.0 * uniform01(rng));
    const auto [lo, mean] = enumerate_costs(a, b);
    CHECK(std::abs(gm_expected(a, b) - mean) <= 1e-12 * std::max(1.0, mean));
    CHECK(gm_min_exact(a, b).value == doctest::Approx(lo));
  }
}

TEST_CASE("approximate matching never beats the exact minimum") {
  const Eigen::MatrixXd p3 = adjacency(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd k3 = adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(gm_min_approx(p3, k3).value == 2.0);
  Rng rng(21);
  int iso_hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const Eigen::MatrixXd a = random_graph(n, 0.4, rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatchOptions options;
    options.seed = static_cast<std::uint64_t>(trial);
    const MatchResult approx = gm_min_approx(a, permuted(a, perm), options);
    CHECK(approx.value == doctest::Approx(match_cost(a, permuted(a, perm), approx.permutation)));
    if (approx.value == 0.0) ++iso_hits;
  }
  CHECK(iso_hits >= 95);
}

TEST_CASE("method 2 ratio") {
  const Eigen::MatrixXd p3 = adjacency(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd k3 = adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(delta_method2(p3, k3) == 1.0);
  CHECK(delta_method2(p3, permuted(p3, {1, 2, 0})) == 0.0);
  CHECK(delta_method2(k3, k3) == 0.0);
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd a = random_graph(2 + static_cast<int>(rng() % 6), 0.5, rng);
    const Eigen::MatrixXd b = random_graph(2 + static_cast<int>(rng() % 6), 0.5, rng);
    const double ab = delta_method2(a, b), ba = delta_method2(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("kernel discrepancy of two point pairs") {
  Eigen::MatrixXd x(2, 1), y(2, 1);
  x << 0, 0;
  y << 0, 1;
  const double e = std::exp(-0.5);
  const double expected = 1.0 + (2.0 + 2.0 * e) / 4.0 - 2.0 * (2.0 + 2.0 * e) / 4.0;
  const double s = kernel_mean_discrepancy(x, y, 1.0);
  CHECK(s == doctest::Approx(expected).epsilon(1e-14));
  Method1Config config;
  config.bandwidth = 1.0;
  const double aligned = aligned_discrepancy(x, y, config);
  CHECK(aligned / (1.0 + aligned) == doctest::Approx(expected / (1.0 + expected)));
  CHECK(kernel_mean_discrepancy(x, x, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("method 1 is zero on identical graphs and invariant to relabelling") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12 + static_cast<int>(rng() % 10);
    const Eigen::MatrixXd a = random_graph(n, 0.4, rng), b = random_graph(n, 0.2, rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Graph ga = Graph::from_dense(a), gb = Graph::from_dense(b);
    CHECK(delta_method1(ga, ga) == doctest::Approx(0.0));
    const double base = delta_method1(ga, gb);
    CHECK(delta_method1(ga, Graph::from_dense(permuted(b, perm))) == doctest::Approx(base).epsilon(1e-6));
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
  }
  CHECK(delta_method1(Graph::from_dense(Eigen::MatrixXd::Zero(3, 3)), Graph::from_dense(Eigen::MatrixXd::Zero(4, 4))) == 0.0);
}

TEST_CASE("0/1 oracle with a Jaccard threshold") {
  const VertexSet truth{0, 1, 2, 3, 4};
  CHECK(delta_oracle01(truth, {truth}) == 0.0);
  CHECK(delta_oracle01({7, 8}, {truth}) == 1.0);
  const VertexSet close{0, 1, 2, 3};
  CHECK(jaccard(close, truth) == doctest::Approx(0.8));
  CHECK(delta_oracle01(close, {truth}, 0.75) == 0.0);
  CHECK(delta_oracle01(close, {truth}) == 1.0);
}

TEST_CASE("isomorphic candidate blocks receive equal dissimilarities") {
  // Three candidate blocks: two isomorphic 6-vertex graphs and one different.
  Rng rng(9);
  const Eigen::MatrixXd motif = random_graph(6, 0.5, rng);
  std::vector<int> perm{3, 5, 0, 1, 4, 2};
  const Eigen::MatrixXd twin = permuted(motif, perm);
  const Eigen::MatrixXd other = random_graph(6, 0.5, rng);
  Eigen::MatrixXd host = Eigen::MatrixXd::Zero(18, 18);
  host.block(0, 0, 6, 6) = motif;
  host.block(6, 6, 6, 6) = twin;
  host.block(12, 12, 6, 6) = other;
  const Graph g = Graph::from_dense(host);
  const Graph train = Graph::from_dense(random_graph(7, 0.5, rng));
  const Subgraph reference{&train, {0, 1, 2, 3, 4, 5, 6}};
  const Subgraph first{&g, {0, 1, 2, 3, 4, 5}}, second{&g, {6, 7, 8, 9, 10, 11}};
  Dissimilarity m2;
  CHECK(std::abs(m2(reference, first) - m2(reference, second)) < 1e-9);
  Dissimilarity m1;
  m1.kind = DissimKind::kMethod1;
  CHECK(std::abs(m1(reference, first) - m1(reference, second)) < 1e-6);
  Dissimilarity oracle;
  oracle.kind = DissimKind::kOracle01;
  CHECK(oracle(first, first) == 0.0);
  CHECK(oracle(first, second) == 1.0);
}
