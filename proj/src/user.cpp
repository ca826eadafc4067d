#include "hsn/user.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hsn {

void UserModel::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("user: theta must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("user: gamma must lie in [0, 1]");
  if (capacity < 1) throw std::invalid_argument("user: capacity must be >= 1");
}

std::vector<int> sample_user(const VertexSet& eta, const VertexSet& interesting, const UserModel& model, Rng& rng) {
  model.validate();
  VertexSet truth(interesting);
  std::sort(truth.begin(), truth.end());
  std::vector<int> replies;
  replies.reserve(eta.size());
  for (int v : eta) {
    const double success = std::binary_search(truth.begin(), truth.end(), v) ? model.theta : model.gamma;
    replies.push_back(uniform01(rng) < success ? 1 : 0);
  }
  return replies;
}

UserQuery select_eta(const Ranking& ranking, int t, int per_block, Rng& rng, const std::vector<char>* used) {
  if (t < 1) throw std::invalid_argument("select_eta: t must be >= 1");
  if (per_block < 1) throw std::invalid_argument("select_eta: per_block must be >= 1");
  if (static_cast<long long>(t) > static_cast<long long>(ranking.size()) * per_block)
    throw std::invalid_argument("select_eta: t = " + std::to_string(t) + " exceeds " + std::to_string(ranking.size()) +
                                " blocks x " + std::to_string(per_block) + " per block");
  UserQuery query;
  std::vector<int> pool;
  for (int b : ranking.order) {
    if (static_cast<int>(query.eta.size()) == t) break;
    pool.clear();
    for (int v : ranking.blocks[static_cast<std::size_t>(b)])
      if (used == nullptr || !(*used)[static_cast<std::size_t>(v)]) pool.push_back(v);
    if (pool.empty()) {
      query.skipped_blocks.push_back(b);
      continue;
    }
    const int take = std::min({per_block, static_cast<int>(pool.size()), t - static_cast<int>(query.eta.size())});
    // Partial Fisher-Yates: the first `take` entries become a uniform sample.
    for (int i = 0; i < take; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
      query.eta.push_back(pool[static_cast<std::size_t>(i)]);
      query.block_of.push_back(b);
    }
  }
  query.exhausted = static_cast<int>(query.eta.size()) < t;
  return query;
}

LabelGroups partition_labels(const Ranking& ranking, const UserQuery& query) {
  if (query.replies.size() != query.eta.size() || query.block_of.size() != query.eta.size())
    throw std::invalid_argument("partition_labels: replies must align with eta");
  std::vector<int> ones(ranking.blocks.size(), 0), asked(ranking.blocks.size(), 0);
  for (std::size_t i = 0; i < query.eta.size(); ++i) {
    const auto b = static_cast<std::size_t>(query.block_of[i]);
    ++asked.at(b);
    ones[b] += query.replies[i] != 0 ? 1 : 0;
  }
  LabelGroups groups;
  for (int b : ranking.order) {
    const auto s = static_cast<std::size_t>(b);
    if (asked[s] == 0)
      groups.unqueried.push_back(b);
    else if (2 * ones[s] > asked[s])
      groups.interesting.push_back(b);
    else
      groups.not_interesting.push_back(b);
  }
  return groups;
}

std::vector<int> rerank_order(const LabelGroups& groups) {
  std::vector<int> order;
  order.reserve(groups.interesting.size() + groups.unqueried.size() + groups.not_interesting.size());
  order.insert(order.end(), groups.interesting.begin(), groups.interesting.end());
  order.insert(order.end(), groups.unqueried.begin(), groups.unqueried.end());
  order.insert(order.end(), groups.not_interesting.begin(), groups.not_interesting.end());
  return order;
}

namespace {

Ranking reordered(const Ranking& ranking, std::vector<int> order) {
  if (order.size() != ranking.order.size()) throw std::invalid_argument("rerank: groups do not partition the ranking");
  std::vector<double> score_of(ranking.blocks.size(), 0.0);
  for (std::size_t r = 0; r < ranking.order.size(); ++r) score_of[static_cast<std::size_t>(ranking.order[r])] = ranking.scores[r];
  Ranking out;
  out.level = ranking.level;
  out.blocks = ranking.blocks;
  for (int b : order) out.scores.push_back(score_of[static_cast<std::size_t>(b)]);
  out.order = std::move(order);
  for (int r = 0; r < out.size(); ++r) out.tie_groups.emplace_back(r, r);
  return out;
}

}  // namespace

Ranking rerank(const Ranking& ranking, const LabelGroups& groups) { return reordered(ranking, rerank_order(groups)); }

Ranking first_affirmative_rerank(const Ranking& ranking, const UserQuery& query) {
  int best_rank = ranking.size();
  for (std::size_t i = 0; i < query.eta.size(); ++i)
    if (query.replies.at(i) != 0) best_rank = std::min(best_rank, ranking.rank_of(query.block_of[i]));
  std::vector<int> order = ranking.order;
  if (best_rank < ranking.size()) std::rotate(order.begin(), order.begin() + best_rank, order.begin() + best_rank + 1);
  Ranking out = reordered(ranking, std::move(order));
  if (best_rank == ranking.size()) out.tie_groups = ranking.tie_groups;
  return out;
}

IterationResult iterate_user(const Ranking& ranking, const VertexSet& interesting, const UserModel& model, int rounds,
                             int per_block, Rng& rng) {
  if (rounds < 1) throw std::invalid_argument("iterate_user: rounds must be >= 1");
  model.validate();
  int n = 0;
  for (const auto& b : ranking.blocks)
    for (int v : b) n = std::max(n, v + 1);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  IterationResult result;
  result.ranking = ranking;
  const int t = std::min<long long>(model.capacity, static_cast<long long>(ranking.size()) * per_block);
  for (int round = 0; round < rounds; ++round) {
    UserQuery query = select_eta(result.ranking, t, per_block, rng, &used);
    if (query.eta.empty()) {
      result.exhausted = true;
      break;
    }
    for (int v : query.eta) used[static_cast<std::size_t>(v)] = 1;
    query.replies = sample_user(query.eta, interesting, model, rng);
    result.ranking = rerank(result.ranking, partition_labels(result.ranking, query));
    result.queries.push_back(std::move(query));
    ++result.rounds_completed;
    if (result.queries.back().exhausted) {
      result.exhausted = true;
      break;
    }
  }
  return result;
}

}  // namespace hsn
