#pragma once

#include <vector>

#include "hsn/graph.hpp"
#include "hsn/nominate.hpp"
#include "hsn/random.hpp"

namespace hsn {

/// Binary labeler: P(1 | interesting vertex) = theta, P(1 | other) = gamma.
/// The oracle is (theta, gamma) = (1, 0).
struct UserModel {
  double theta = 1.0;
  double gamma = 0.0;
  int capacity = 1;

  static UserModel oracle(int capacity) { return {1.0, 0.0, capacity}; }
  /// Throws std::invalid_argument unless theta, gamma in [0, 1] and capacity >= 1.
  void validate() const;
};

/// Queried vertices with the block each was drawn from and the replies.
struct UserQuery {
  VertexSet eta;
  /// block_of[i] is the ranking's block index holding eta[i].
  std::vector<int> block_of;
  std::vector<int> replies;
  /// Ranked blocks passed over because they had no eligible vertex.
  std::vector<int> skipped_blocks;
  /// Fewer than the requested number of vertices were available.
  bool exhausted = false;
};

/// Independent Bernoulli replies: theta for members of `interesting`, gamma otherwise.
std::vector<int> sample_user(const VertexSet& eta, const VertexSet& interesting, const UserModel& model, Rng& rng);

/// Walks the ranking best first and draws up to `per_block` distinct
/// vertices uniformly from each block until t are collected. Vertices with
/// used[v] != 0 are ineligible. Throws std::invalid_argument when
/// t > ranking.size() * per_block.
UserQuery select_eta(const Ranking& ranking, int t, int per_block, Rng& rng, const std::vector<char>* used = nullptr);

/// Block indices split by the user's replies, each in ranking order.
struct LabelGroups {
  /// More than half of the block's queried vertices labelled 1.
  std::vector<int> interesting;
  /// At least half labelled 0; an exact split lands here.
  std::vector<int> not_interesting;
  /// No queried vertex.
  std::vector<int> unqueried;
};

LabelGroups partition_labels(const Ranking& ranking, const UserQuery& query);

/// I, then M, then N, stable within each group.
std::vector<int> rerank_order(const LabelGroups& groups);
Ranking rerank(const Ranking& ranking, const LabelGroups& groups);

/// Moves the best-ranked block with an affirmative reply to rank 1.
Ranking first_affirmative_rerank(const Ranking& ranking, const UserQuery& query);

struct IterationResult {
  Ranking ranking;
  int rounds_completed = 0;
  /// The vertex pool ran out before all rounds were done.
  bool exhausted = false;
  std::vector<UserQuery> queries;
};

/// Sequential select / reply / rerank rounds of model.capacity vertices,
/// never querying a vertex twice.
IterationResult iterate_user(const Ranking& ranking, const VertexSet& interesting, const UserModel& model, int rounds,
                             int per_block, Rng& rng);

}  // namespace hsn
