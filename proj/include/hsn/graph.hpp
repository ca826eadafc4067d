#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hsn {

using VertexSet = std::vector<int>;

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

/// Undirected, hollow, non-negatively weighted graph on vertices 0..n-1.
///
/// Stored as a symmetric sparse matrix holding both triangles. Zero-weight
/// edges are not stored. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Throws std::invalid_argument on self loops, negative weights or
  /// out-of-range endpoints. Repeated pairs keep the last weight.
  Graph(int n, std::span<const WeightedEdge> edges);

  static Graph from_dense(const Eigen::MatrixXd& adjacency);

  int size() const { return n_; }
  std::int64_t edge_count() const { return adjacency_.nonZeros() / 2; }
  double weight(int u, int v) const;
  const Eigen::SparseMatrix<double>& adjacency() const { return adjacency_; }
  Eigen::MatrixXd dense() const;

  /// Dense adjacency of the subgraph induced by `vertices`, rows in the given order.
  Eigen::MatrixXd induced_dense(std::span<const int> vertices) const;
  Graph induced(std::span<const int> vertices) const;

  std::vector<int> degrees() const;
  std::vector<WeightedEdge> edges() const;

 private:
  int n_ = 0;
  Eigen::SparseMatrix<double> adjacency_;
};

/// Index of a block: `level` in [0, k), `index` in [0, n_level).
struct BlockRef {
  int level = 0;
  int index = 0;
  friend bool operator==(const BlockRef&, const BlockRef&) = default;
};

enum class HierarchyViolation {
  kNone,
  kNoLevels,
  kShapeMismatch,
  kIndexOutOfRange,
  kEmptyBlock,
  kNonMonotoneSignature,
  kNotNested,
};

struct HierarchyReport {
  bool ok = true;
  HierarchyViolation violation = HierarchyViolation::kNone;
  std::string message;
  std::vector<int> signature;
};

/// Checks the nested-partition conditions on a raw assignment
/// `levels[i][v]` (0-based block index of vertex v at level i). Violations
/// are reported, never thrown; the first one found is returned.
HierarchyReport validate_hierarchy(const std::vector<std::vector<int>>& levels, int n);

/// A validated k-level nested partition of 0..n-1.
class HierarchicalFunction {
 public:
  HierarchicalFunction() = default;
  /// Throws std::invalid_argument carrying the validation message.
  explicit HierarchicalFunction(std::vector<std::vector<int>> levels);

  static HierarchicalFunction single_level(std::vector<int> assignment);

  int levels() const { return static_cast<int>(assignment_.size()); }
  int vertex_count() const { return assignment_.empty() ? 0 : static_cast<int>(assignment_[0].size()); }
  const std::vector<int>& signature() const { return signature_; }
  int block_count(int level) const { return signature_.at(static_cast<std::size_t>(level)); }
  int operator()(int vertex, int level) const {
    return assignment_[static_cast<std::size_t>(level)][static_cast<std::size_t>(vertex)];
  }
  const std::vector<int>& level_assignment(int level) const {
    return assignment_.at(static_cast<std::size_t>(level));
  }
  const std::vector<std::vector<int>>& raw() const { return assignment_; }

  bool valid(const BlockRef& ref) const;
  /// Vertex sets of every block at `level`, each sorted ascending.
  std::vector<VertexSet> blocks(int level) const;

 private:
  std::vector<std::vector<int>> assignment_;
  std::vector<int> signature_;
};

/// {v : H(v, level) = index}, sorted. Throws std::out_of_range on unknown refs.
VertexSet block(const HierarchicalFunction& h, const BlockRef& ref);

/// Union of the level-`ref.level` blocks sharing the parent of `ref`. At the
/// top level there is no parent and the block itself is returned.
VertexSet parent_merge(const HierarchicalFunction& h, const BlockRef& ref);

/// Sibling indices of `ref` at the same level (sharing its parent), ascending.
std::vector<int> siblings(const HierarchicalFunction& h, const BlockRef& ref);

struct InterestSet {
  std::vector<BlockRef> refs;
  std::vector<VertexSet> resolved;

  /// Resolves `refs` against `h`. Throws on invalid or repeated refs.
  static InterestSet resolve(const HierarchicalFunction& h, std::vector<BlockRef> refs);
  /// Sorted union of all resolved vertex sets.
  VertexSet vertices() const;
};

enum class IsoMode { kExact, kHeuristic };

struct IsoOptions {
  IsoMode mode = IsoMode::kExact;
  int exact_n_cap = 10;
  /// Backtracking node budget for heuristic-mode subgraph isomorphism before
  /// falling back to colour-refinement equality.
  std::int64_t heuristic_budget = 2'000'000;
};

/// Sibling indices l of `ref` such that some automorphism of `g` maps block l
/// onto block `ref` (exact mode), or whose induced subgraph is isomorphic to
/// the induced subgraph of `ref` (heuristic mode). Always contains ref.index.
/// Exact mode throws std::invalid_argument when g.size() > exact_n_cap.
std::vector<int> iso_equivalence_class(const Graph& g, const HierarchicalFunction& h, const BlockRef& ref,
                                       const IsoOptions& options = {});

/// Searches for an automorphism sigma of g with sigma(from) = to (as sets).
std::optional<std::vector<int>> find_automorphism_mapping(const Graph& g, std::span<const int> from,
                                                          std::span<const int> to);

/// Weighted isomorphism test between two dense hollow adjacency matrices.
/// Returns nullopt when the search exhausts `budget` nodes without a verdict.
std::optional<bool> isomorphic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::int64_t budget);

}  // namespace hsn
