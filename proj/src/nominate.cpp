#include "hsn/nominate.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hsn {

int Ranking::rank_of(int block_index) const {
  const auto it = std::find(order.begin(), order.end(), block_index);
  return it == order.end() ? -1 : static_cast<int>(it - order.begin());
}

Ranking ranking_from_scores(int level, std::vector<VertexSet> blocks, const std::vector<double>& scores) {
  if (scores.size() != blocks.size()) throw std::invalid_argument("ranking: one score per block required");
  Ranking out;
  out.level = level;
  out.order.resize(scores.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  for (int b : out.order) out.scores.push_back(scores[static_cast<std::size_t>(b)]);
  for (int r = 0; r < out.size();) {
    int end = r;
    while (end + 1 < out.size() && out.scores[static_cast<std::size_t>(end + 1)] == out.scores[static_cast<std::size_t>(r)]) ++end;
    out.tie_groups.emplace_back(r, end);
    r = end + 1;
  }
  out.blocks = std::move(blocks);
  return out;
}

Ranking rank_subgraphs(const InterestSet& training, const Graph& g1, const HierarchicalFunction& candidates,
                       const Graph& g2, const Dissimilarity& delta, int level) {
  if (training.resolved.empty()) throw std::invalid_argument("rank_subgraphs: no training subgraphs");
  if (level < 0 || level >= candidates.levels()) {
    Ranking empty;
    empty.level = level;
    return empty;
  }
  auto blocks = candidates.blocks(level);
  std::vector<double> scores(blocks.size(), std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Subgraph candidate{&g2, blocks[j]};
    for (const auto& t : training.resolved) scores[j] = std::min(scores[j], delta(Subgraph{&g1, t}, candidate));
  }
  return ranking_from_scores(level, std::move(blocks), scores);
}

bool is_interesting(const Ranking& ranking, int rank, const Graph& g2, const std::vector<VertexSet>& interesting,
                    const Dissimilarity& delta_e, double threshold) {
  const Subgraph candidate{&g2, ranking.blocks[static_cast<std::size_t>(ranking.order[static_cast<std::size_t>(rank)])]};
  return std::any_of(interesting.begin(), interesting.end(), [&](const VertexSet& b) {
    return delta_e(Subgraph{&g2, b}, candidate) <= threshold;
  });
}

double loss(const Ranking& ranking, const Graph& g2, const std::vector<VertexSet>& interesting,
            const Dissimilarity& delta_e, int i, double threshold) {
  if (i < 1) throw std::invalid_argument("loss: i must be >= 1");
  if (ranking.empty()) return 1.0;
  const int top = std::min(i, ranking.size());
  int misses = 0;
  for (int r = 0; r < top; ++r)
    if (!is_interesting(ranking, r, g2, interesting, delta_e, threshold)) ++misses;
  return static_cast<double>(misses) / static_cast<double>(top);
}

HitCurve hit_curve(const Ranking& ranking, const Graph& g2, const std::vector<VertexSet>& interesting,
                   const Dissimilarity& delta_e, double threshold) {
  HitCurve out;
  out.position = ranking.size() + 1;
  for (int r = 0; r < ranking.size(); ++r)
    if (is_interesting(ranking, r, g2, interesting, delta_e, threshold)) {
      out.position = r + 1;
      break;
    }
  out.curve.resize(static_cast<std::size_t>(ranking.size()));
  for (int r = 0; r < ranking.size(); ++r) out.curve[static_cast<std::size_t>(r)] = r + 1 >= out.position ? 1 : 0;
  return out;
}

double top_vertices_recall(const Ranking& ranking, const VertexSet& interesting, int m) {
  if (interesting.empty()) return 0.0;
  VertexSet truth(interesting);
  std::sort(truth.begin(), truth.end());
  int taken = 0, hits = 0;
  for (int b : ranking.order) {
    VertexSet members = ranking.blocks[static_cast<std::size_t>(b)];
    std::sort(members.begin(), members.end());
    for (int v : members) {
      if (taken == m) break;
      ++taken;
      if (std::binary_search(truth.begin(), truth.end(), v)) ++hits;
    }
    if (taken == m) break;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

BlockOverlap block_overlap(const std::vector<VertexSet>& estimated, const VertexSet& true_block) {
  if (estimated.empty()) throw std::invalid_argument("block_overlap: no estimated blocks");
  VertexSet truth(true_block);
  std::sort(truth.begin(), truth.end());
  std::vector<int> overlap(estimated.size(), 0);
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    if (estimated[i].empty()) throw std::invalid_argument("block_overlap: estimated block " + std::to_string(i) + " is empty");
    for (int v : estimated[i])
      if (std::binary_search(truth.begin(), truth.end(), v)) ++overlap[i];
  }
  BlockOverlap out;
  out.best_block = static_cast<int>(std::max_element(overlap.begin(), overlap.end()) - overlap.begin());
  auto fraction = [&](std::size_t i) { return static_cast<double>(overlap[i]) / static_cast<double>(estimated[i].size()); };
  out.alpha = fraction(static_cast<std::size_t>(out.best_block));
  out.beta = estimated.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i)
    if (static_cast<int>(i) != out.best_block) out.beta = std::min(out.beta, fraction(i));
  return out;
}

}  // namespace hsn
