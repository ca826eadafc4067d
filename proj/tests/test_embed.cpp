#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "doctest.h"
#include "hsn/embed.hpp"
#include "hsn/models.hpp"
#include "hsn/random.hpp"

using namespace hsn;

namespace {

// Fraction of points whose label agrees after the best one-to-one relabelling
// (greedy over the contingency table, exact for near-perfect agreement).
double agreement(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, int> table;
  for (std::size_t i = 0; i < a.size(); ++i) ++table[{a[i], b[i]}];
  std::vector<std::pair<int, std::pair<int, int>>> cells;
  for (const auto& [key, count] : table) cells.push_back({count, key});
  std::sort(cells.rbegin(), cells.rend());
  std::map<int, int> used_a, used_b;
  int matched = 0;
  for (const auto& [count, key] : cells) {
    if (used_a.count(key.first) || used_b.count(key.second)) continue;
    used_a[key.first] = 1;
    used_b[key.second] = 1;
    matched += count;
  }
  return static_cast<double>(matched) / static_cast<double>(a.size());
}

// Elbow oracle: maximise the two-group Gaussian profile likelihood with a
// shared variance over every split point.
int elbow_oracle(std::vector<double> x) {
  std::sort(x.rbegin(), x.rend());
  const int p = static_cast<int>(x.size());
  int best = 1;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int q = 1; q < p; ++q) {
    double m1 = 0, m2 = 0;
    for (int i = 0; i < q; ++i) m1 += x[static_cast<std::size_t>(i)] / q;
    for (int i = q; i < p; ++i) m2 += x[static_cast<std::size_t>(i)] / (p - q);
    double var = 0;
    for (int i = 0; i < p; ++i) {
      const double m = i < q ? m1 : m2;
      var += (x[static_cast<std::size_t>(i)] - m) * (x[static_cast<std::size_t>(i)] - m) / p;
    }
    const double ll = var > 0 ? -0.5 * p * std::log(var) : std::numeric_limits<double>::infinity();
    if (ll > best_ll) {
      best_ll = ll;
      best = q;
    }
  }
  return best;
}

Eigen::MatrixXd two_clusters(int per, double gap, Rng& rng, std::vector<int>& truth) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(2 * per, 2);
  truth.assign(static_cast<std::size_t>(2 * per), 0);
  for (int i = 0; i < 2 * per; ++i) {
    const int c = i < per ? 0 : 1;
    truth[static_cast<std::size_t>(i)] = c;
    x(i, 0) = z(rng) + c * gap;
    x(i, 1) = z(rng) - c * gap;
  }
  return x;
}

}  // namespace

TEST_CASE("empty graph embeds at the origin") {
  const Graph g(5, std::vector<WeightedEdge>{});
  const Embedding e = ase(g, 2);
  CHECK(e.points.rows() == 5);
  CHECK(e.points.cols() == 1);
  CHECK(e.points.isZero(0.0));
  CHECK(e.warning.has_value());
}

TEST_CASE("expected adjacency of a two-block model gives two latent points") {
  const int n = 40;
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool same = (i < n / 2) == (j < n / 2);
      p(i, j) = i == j ? 0.0 : (same ? 0.6 : 0.2);
    }
  const Embedding e = ase(Graph::from_dense(p), 2);
  CHECK(e.dimension() == 2);
  double within = 0.0;
  for (int i = 1; i < n / 2; ++i) within = std::max(within, (e.points.row(i) - e.points.row(0)).norm());
  const double between = (e.points.row(0) - e.points.row(n - 1)).norm();
  CHECK(between > 0.5);
  CHECK(within < 1e-9);
}

TEST_CASE("embedding is equivariant under vertex relabelling") {
  Rng rng(12);
  const int n = 30;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < 0.3) a(i, j) = a(j, i) = 0.5 + uniform01(rng);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = a(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  const Embedding ea = ase(Graph::from_dense(a), 3), eb = ase(Graph::from_dense(b), 3);
  for (int i = 0; i < n; ++i) CHECK((eb.points.row(i) - ea.points.row(perm[static_cast<std::size_t>(i)])).norm() < 1e-8);
}

TEST_CASE("dense and iterative eigensolvers agree") {
  SbmParams p;
  p.n = 1300;
  p.lambda.resize(3, 3);
  p.lambda << 0.3, 0.05, 0.02, 0.05, 0.25, 0.04, 0.02, 0.04, 0.2;
  p.pi = Eigen::Vector3d(0.3, 0.3, 0.4);
  Rng rng(2);
  const SbmSample s = sample_sbm(p, rng);
  const TopEigen iterative = top_eigenpairs(s.graph, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(s.graph.dense());
  std::vector<double> mags(dense.eigenvalues().data(), dense.eigenvalues().data() + p.n);
  for (auto& m : mags) m = std::abs(m);
  std::sort(mags.rbegin(), mags.rend());
  for (int k = 0; k < 3; ++k) CHECK(std::abs(std::abs(iterative.values(k)) - mags[static_cast<std::size_t>(k)]) < 1e-6 * mags[0]);
}

TEST_CASE("dimension selection by profile likelihood") {
  Eigen::VectorXd s(5);
  s << 10, 9.5, 0.1, 0.09, 0.08;
  CHECK(select_dim(s) == 2);
  CHECK(select_dim(Eigen::VectorXd::Constant(6, 3.0)) == 1);
  CHECK(select_dim(Eigen::VectorXd::Constant(1, 3.0)) == 1);
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 10);
    std::vector<double> x(static_cast<std::size_t>(p));
    for (auto& v : x) v = std::exp(3.0 * uniform01(rng));
    const Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(x.data(), p);
    CHECK(select_dim(vec) == elbow_oracle(x));
  }
}

TEST_CASE("feature augmentation") {
  Embedding e;
  e.points = Eigen::MatrixXd::Random(10, 2);
  CHECK(augment_features(e, Eigen::MatrixXd()).points == e.points);
  Eigen::MatrixXd f = Eigen::MatrixXd::Random(10, 3);
  CHECK(augment_features(e, f).dimension() == 5);
  f.col(1).setConstant(4.0);
  const Embedding dropped = augment_features(e, f);
  CHECK(dropped.dimension() == 4);
  CHECK(std::abs(dropped.points.col(3).mean()) < 1e-12);
  CHECK_THROWS_AS(augment_features(e, Eigen::MatrixXd::Random(9, 3)), std::invalid_argument);
}

TEST_CASE("mixture selects two well separated clusters") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<int> truth;
    const Eigen::MatrixXd x = two_clusters(60, 8.0, rng, truth);
    GmmOptions options;
    options.candidates = {1, 2, 3};
    options.seed = seed;
    const PartitionEstimate est = gmm_fit(x, options);
    if (est.blocks == 2 && agreement(est.assignment, truth) >= 0.98) ++good;
  }
  CHECK(good == 50);
}

TEST_CASE("forced component counts") {
  Rng rng(9);
  std::vector<int> truth;
  const Eigen::MatrixXd x = two_clusters(20, 6.0, rng, truth);
  GmmOptions one;
  one.candidates = {1};
  const PartitionEstimate single = gmm_fit(x, one);
  CHECK(single.blocks == 1);
  CHECK(std::all_of(single.assignment.begin(), single.assignment.end(), [](int b) { return b == 0; }));

  Eigen::MatrixXd six(6, 2);
  six << 0, 0, 5, 0, 0, 5, 5, 5, 10, 0, 0, 10;
  GmmOptions all;
  all.candidates = {6};
  all.restarts = 2;
  const PartitionEstimate each = gmm_fit(six, all);
  CHECK(each.blocks == 6);
  std::vector<int> sorted = each.assignment;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());
  CHECK_THROWS_AS(gmm_fit(six, GmmOptions{{7}}), std::invalid_argument);
}

TEST_CASE("mixture labels are invariant to rotations") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> truth;
    const Eigen::MatrixXd x = two_clusters(40, 3.0, rng, truth);
    const double angle = 6.283185307179586 * uniform01(rng);
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    GmmOptions options;
    options.candidates = {2, 3};
    options.seed = 5;
    const PartitionEstimate a = gmm_fit(x, options);
    const PartitionEstimate b = gmm_fit(x * r.transpose(), options);
    CHECK(a.blocks == b.blocks);
    CHECK(agreement(a.assignment, b.assignment) == 1.0);
  }
}

TEST_CASE("EM runs keep the penalised objective monotone on varied data") {
  Rng rng(55);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30 + static_cast<int>(rng() % 50);
    const int d = 1 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = z(rng) + (i % 3) * 2.0 * (j == 0);
    GmmOptions options;
    options.candidates = {1, 2, 3, 4};
    options.seed = static_cast<std::uint64_t>(trial);
    CHECK_NOTHROW(gmm_fit(x, options));
  }
}

TEST_CASE("two disjoint cliques are recovered as two blocks") {
  std::vector<WeightedEdge> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) edges.push_back({8 * c + i, 8 * c + j, 1.0});
  const Graph g(16, edges);
  EstimateConfig config;
  config.gmm.candidates = {2};
  const HierarchyEstimate est = estimate_hierarchy(g, config);
  std::vector<int> truth(16);
  for (int v = 0; v < 16; ++v) truth[static_cast<std::size_t>(v)] = v / 8;
  CHECK(est.hierarchy.block_count(0) == 2);
  CHECK(agreement(est.hierarchy.level_assignment(0), truth) == 1.0);
}

TEST_CASE("simulation graph splits into eight blocks deterministically") {
  Rng rng(123);
  const SimModel model = build_sim_model(SimModelSpec::reduced(), rng);
  const HsbmSample sample = sample_hsbm(model.params, rng);
  EstimateConfig config;
  config.gmm.candidates = {8};
  config.gmm.restarts = 2;
  config.gmm.seed = 4;
  const HierarchyEstimate a = estimate_hierarchy(sample.graph, config);
  const HierarchyEstimate b = estimate_hierarchy(sample.graph, config);
  CHECK(a.hierarchy.block_count(0) <= 8);
  CHECK(a.hierarchy.block_count(0) >= 7);
  CHECK(validate_hierarchy(a.hierarchy.raw(), sample.graph.size()).ok);
  CHECK(a.hierarchy.raw() == b.hierarchy.raw());
}
