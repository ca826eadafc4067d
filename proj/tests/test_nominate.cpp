#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "hsn/nominate.hpp"
#include "hsn/random.hpp"

using namespace hsn;

namespace {

// n blocks of `size` consecutive vertices, no edges.
std::vector<VertexSet> consecutive_blocks(int n, int size) {
  std::vector<VertexSet> blocks(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < size; ++i) blocks[static_cast<std::size_t>(b)].push_back(b * size + i);
  return blocks;
}

Dissimilarity oracle() {
  Dissimilarity d;
  d.kind = DissimKind::kOracle01;
  return d;
}

}  // namespace

TEST_CASE("oracle ranks the matching candidate first with score zero") {
  const Graph g(12, std::vector<WeightedEdge>{});
  std::vector<int> assignment(12);
  for (int v = 0; v < 12; ++v) assignment[static_cast<std::size_t>(v)] = v / 4;
  const auto h = HierarchicalFunction::single_level(assignment);
  const auto training = InterestSet::resolve(h, {{0, 2}});
  const Ranking r = rank_subgraphs(training, g, h, g, oracle(), 0);
  CHECK(r.order == std::vector<int>{2, 0, 1});
  CHECK(r.scores == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(r.tie_groups == std::vector<std::pair<int, int>>{{0, 0}, {1, 2}});
  CHECK(r.rank_of(1) == 2);
  CHECK(r.rank_of(7) == -1);
}

TEST_CASE("identical candidates fall back to ascending block index") {
  const Graph g(12, std::vector<WeightedEdge>{});
  std::vector<int> assignment(12);
  for (int v = 0; v < 12; ++v) assignment[static_cast<std::size_t>(v)] = 3 - v / 3;
  const auto h = HierarchicalFunction::single_level(assignment);
  const Graph train(3, std::vector<WeightedEdge>{{0, 1, 1.0}});
  const auto t = InterestSet::resolve(HierarchicalFunction::single_level({0, 0, 0}), {{0, 0}});
  const Ranking r = rank_subgraphs(t, train, h, g, Dissimilarity{}, 0);
  CHECK(r.order == std::vector<int>{0, 1, 2, 3});
  CHECK(r.tie_groups.size() == 1);
  CHECK(rank_subgraphs(t, train, h, g, Dissimilarity{}, 3).empty());
}

TEST_CASE("scores aggregate by the minimum over training subgraphs") {
  const std::vector<std::vector<double>> values{{0.4, 0.1}, {0.3, 0.5}};
  std::vector<double> scores;
  for (const auto& row : values) scores.push_back(*std::min_element(row.begin(), row.end()));
  const Ranking r = ranking_from_scores(0, consecutive_blocks(2, 1), scores);
  CHECK(r.scores == std::vector<double>{0.1, 0.3});
  CHECK(r.order == std::vector<int>{0, 1});

  const Graph g(6, std::vector<WeightedEdge>{});
  const auto h = HierarchicalFunction::single_level({0, 0, 1, 1, 2, 2});
  const auto training = InterestSet::resolve(h, {{0, 0}, {0, 2}});
  const Ranking aggregated = rank_subgraphs(training, g, h, g, oracle(), 0);
  CHECK(aggregated.order == std::vector<int>{0, 2, 1});
  CHECK(aggregated.scores == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("loss averages misses over the top ranks") {
  const Graph g(25, std::vector<WeightedEdge>{});
  const auto blocks = consecutive_blocks(5, 5);
  const Ranking r = ranking_from_scores(0, blocks, {0.5, 0.1, 0.2, 0.3, 0.4});
  CHECK(r.order == std::vector<int>{1, 2, 3, 4, 0});
  const std::vector<VertexSet> interesting{blocks[2]};
  CHECK(loss(r, g, interesting, oracle(), 3, 0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(loss(r, g, interesting, oracle(), 1, 0.5) == 1.0);
  CHECK(loss(r, g, {blocks[1]}, oracle(), 1, 0.5) == 0.0);
  CHECK(loss(r, g, interesting, oracle(), 100, 0.5) == doctest::Approx(4.0 / 5.0));
  CHECK(loss(Ranking{}, g, interesting, oracle(), 1, 0.5) == 1.0);
}

TEST_CASE("loss is monotone in the threshold") {
  Rng rng(6);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(30, 30);
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (uniform01(rng) < 0.4) a(i, j) = a(j, i) = 1.0;
  const Graph g = Graph::from_dense(a);
  const auto blocks = consecutive_blocks(6, 5);
  const Ranking r = ranking_from_scores(0, blocks, {0.3, 0.1, 0.6, 0.2, 0.9, 0.4});
  const std::vector<VertexSet> interesting{blocks[4]};
  const Dissimilarity m2;
  double previous = 2.0;
  for (double t : {0.05, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double l = loss(r, g, interesting, m2, 4, t);
    CHECK(l <= previous);
    previous = l;
  }
}

TEST_CASE("hit curve marks the first interesting rank") {
  const Graph g(20, std::vector<WeightedEdge>{});
  const auto blocks = consecutive_blocks(4, 5);
  const Ranking r = ranking_from_scores(0, blocks, {0.1, 0.2, 0.3, 0.4});
  const HitCurve first = hit_curve(r, g, {blocks[0]}, oracle(), 0.5);
  CHECK(first.position == 1);
  CHECK(first.curve == std::vector<int>{1, 1, 1, 1});
  const HitCurve third = hit_curve(r, g, {blocks[2]}, oracle(), 0.5);
  CHECK(third.position == 3);
  CHECK(third.curve == std::vector<int>{0, 0, 1, 1});
  const HitCurve none = hit_curve(r, g, {{0, 5}}, oracle(), 0.5);
  CHECK(none.position == 5);
  CHECK(none.curve == std::vector<int>{0, 0, 0, 0});
  CHECK(third.curve[0] == 1 - static_cast<int>(loss(r, g, {blocks[2]}, oracle(), 1, 0.5)));
}

TEST_CASE("monotone transforms of the scores leave rankings unchanged") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    std::vector<double> scores(static_cast<std::size_t>(n)), transformed(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i] = std::floor(5.0 * uniform01(rng)) / 5.0;
      transformed[i] = std::exp(3.0 * scores[i]) - 7.0;
    }
    const auto blocks = consecutive_blocks(n, 1);
    CHECK(ranking_from_scores(0, blocks, scores).order == ranking_from_scores(0, blocks, transformed).order);
  }
}

TEST_CASE("top-vertex recall") {
  auto blocks = consecutive_blocks(3, 10);
  blocks.push_back({});
  for (int v = 30; v < 70; ++v) blocks.back().push_back(v);
  const Ranking first = ranking_from_scores(0, blocks, {0.1, 0.2, 0.3, 0.4});
  CHECK(top_vertices_recall(first, blocks[0]) == 1.0);
  const Ranking big = ranking_from_scores(0, blocks, {0.4, 0.2, 0.3, 0.1});
  CHECK(top_vertices_recall(big, blocks[3]) == doctest::Approx(25.0 / 40.0));
  CHECK(top_vertices_recall(big, blocks[0]) == 0.0);
  CHECK(top_vertices_recall(first, blocks[2]) == doctest::Approx(0.5));
}

TEST_CASE("block overlap") {
  const auto blocks = consecutive_blocks(5, 10);
  const BlockOverlap perfect = block_overlap(blocks, blocks[3]);
  CHECK(perfect.alpha == 1.0);
  CHECK(perfect.beta == 0.0);
  CHECK(perfect.best_block == 3);

  const VertexSet half{0, 1, 2, 3, 4, 50, 51, 52, 53, 54};
  CHECK(block_overlap(blocks, half).alpha == 0.5);

  VertexSet spread;
  for (int b = 0; b < 5; ++b) {
    spread.push_back(10 * b);
    spread.push_back(10 * b + 1);
  }
  const BlockOverlap even = block_overlap(blocks, spread);
  CHECK(even.alpha == doctest::Approx(0.2));
  CHECK(even.beta == doctest::Approx(0.2));
  CHECK(block_overlap({blocks[0]}, blocks[0]).beta == 0.0);
  CHECK_THROWS_AS(block_overlap({blocks[0], {}}, blocks[0]), std::invalid_argument);
}
