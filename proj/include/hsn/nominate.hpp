#pragma once

#include <vector>

#include "hsn/dissim.hpp"
#include "hsn/graph.hpp"

namespace hsn {

/// Total ordering of the candidate blocks at one level, best first.
struct Ranking {
  int level = 0;
  /// order[r] is the block index at rank r (0-based).
  std::vector<int> order;
  /// scores[r] belongs to order[r]. Non-decreasing for scheme output; user
  /// re-ranking keeps each block's original score.
  std::vector<double> scores;
  /// Vertex sets of the candidate blocks, indexed by block index.
  std::vector<VertexSet> blocks;
  /// Consecutive runs of equal scores, as [first rank, last rank] pairs.
  std::vector<std::pair<int, int>> tie_groups;

  int size() const { return static_cast<int>(order.size()); }
  bool empty() const { return order.empty(); }
  /// 0-based rank of a block index; -1 if absent.
  int rank_of(int block_index) const;
};

/// Builds a ranking from per-block scores: ascending score, ties by
/// ascending block index.
Ranking ranking_from_scores(int level, std::vector<VertexSet> blocks, const std::vector<double>& scores);

/// Scores each block of `candidates` at `level` by the minimum dissimilarity
/// to the training subgraphs of g1, then sorts ascending. An empty level
/// yields an empty ranking.
Ranking rank_subgraphs(const InterestSet& training, const Graph& g1, const HierarchicalFunction& candidates,
                       const Graph& g2, const Dissimilarity& delta, int level);

/// Whether the block at a rank matches some interesting block: its
/// evaluation dissimilarity to at least one of them is <= threshold.
bool is_interesting(const Ranking& ranking, int rank, const Graph& g2, const std::vector<VertexSet>& interesting,
                    const Dissimilarity& delta_e, double threshold);

/// Fraction of the top min(i, m) ranked blocks that miss every interesting
/// block (dissimilarity > threshold). 1 for an empty ranking.
double loss(const Ranking& ranking, const Graph& g2, const std::vector<VertexSet>& interesting,
            const Dissimilarity& delta_e, int i, double threshold);

struct HitCurve {
  /// 1-based rank of the first interesting block; size() + 1 when none.
  int position = 0;
  /// curve[r] = 1 once rank r + 1 reaches `position`.
  std::vector<int> curve;
};

HitCurve hit_curve(const Ranking& ranking, const Graph& g2, const std::vector<VertexSet>& interesting,
                   const Dissimilarity& delta_e, double threshold);

/// Collects vertices of ranked blocks in order (ascending ids within a
/// block) until `m` are taken; returns the captured fraction of `interesting`.
double top_vertices_recall(const Ranking& ranking, const VertexSet& interesting, int m = 25);

struct BlockOverlap {
  double alpha = 0.0;
  double beta = 0.0;
  /// Estimated block with the largest intersection with the true block.
  int best_block = -1;
};

/// alpha: precision of the best-overlapping estimated block against the true
/// block. beta: smallest fraction of true-block vertices among the other
/// estimated blocks (0 when there are none). Throws on empty estimated blocks.
BlockOverlap block_overlap(const std::vector<VertexSet>& estimated, const VertexSet& true_block);

}  // namespace hsn
