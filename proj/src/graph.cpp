#include "hsn/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace hsn {

Graph::Graph(int n, std::span<const WeightedEdge> edges) : n_(n), adjacency_(n, n) {
  if (n < 0) throw std::invalid_argument("graph: negative vertex count");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("graph: self loop on vertex " + std::to_string(e.u));
    if (!(e.weight >= 0.0)) throw std::invalid_argument("graph: negative or NaN edge weight");
    if (e.weight == 0.0) continue;
    triplets.emplace_back(e.u, e.v, e.weight);
    triplets.emplace_back(e.v, e.u, e.weight);
  }
  // Repeated pairs keep the last weight rather than summing.
  adjacency_.setFromTriplets(triplets.begin(), triplets.end(), [](double, double b) { return b; });
  adjacency_.makeCompressed();
}

Graph Graph::from_dense(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw std::invalid_argument("graph: adjacency must be square");
  const auto n = static_cast<int>(adjacency.rows());
  std::vector<WeightedEdge> edges;
  for (int u = 0; u < n; ++u) {
    if (adjacency(u, u) != 0.0) throw std::invalid_argument("graph: adjacency must be hollow");
    for (int v = u + 1; v < n; ++v) {
      if (adjacency(u, v) != adjacency(v, u)) throw std::invalid_argument("graph: adjacency must be symmetric");
      if (adjacency(u, v) != 0.0) edges.push_back({u, v, adjacency(u, v)});
    }
  }
  return Graph(n, edges);
}

double Graph::weight(int u, int v) const { return adjacency_.coeff(u, v); }

Eigen::MatrixXd Graph::dense() const { return Eigen::MatrixXd(adjacency_); }

Eigen::MatrixXd Graph::induced_dense(std::span<const int> vertices) const {
  const auto m = static_cast<Eigen::Index>(vertices.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  std::vector<int> position(static_cast<std::size_t>(n_), -1);
  for (Eigen::Index i = 0; i < m; ++i) position[static_cast<std::size_t>(vertices[static_cast<std::size_t>(i)])] = static_cast<int>(i);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int u = vertices[static_cast<std::size_t>(i)];
    for (Eigen::SparseMatrix<double>::InnerIterator it(adjacency_, u); it; ++it) {
      const int j = position[static_cast<std::size_t>(it.row())];
      if (j >= 0) out(i, j) = it.value();
    }
  }
  return out;
}

Graph Graph::induced(std::span<const int> vertices) const { return from_dense(induced_dense(vertices)); }

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(n_), 0);
  for (int v = 0; v < n_; ++v)
    deg[static_cast<std::size_t>(v)] = static_cast<int>(adjacency_.outerIndexPtr()[v + 1] - adjacency_.outerIndexPtr()[v]);
  return deg;
}

std::vector<WeightedEdge> Graph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (int v = 0; v < n_; ++v)
    for (Eigen::SparseMatrix<double>::InnerIterator it(adjacency_, v); it; ++it)
      if (it.row() > v) out.push_back({v, static_cast<int>(it.row()), it.value()});
  return out;
}

// ---------------------------------------------------------------------------
// Hierarchies

HierarchyReport validate_hierarchy(const std::vector<std::vector<int>>& levels, int n) {
  HierarchyReport report;
  auto fail = [&](HierarchyViolation v, std::string msg) {
    report.ok = false;
    report.violation = v;
    report.message = std::move(msg);
    return report;
  };
  if (levels.empty()) return fail(HierarchyViolation::kNoLevels, "hierarchy has no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& lvl = levels[i];
    if (static_cast<int>(lvl.size()) != n)
      return fail(HierarchyViolation::kShapeMismatch,
                  "level " + std::to_string(i + 1) + " assigns " + std::to_string(lvl.size()) + " vertices, expected " +
                      std::to_string(n));
    int max_block = -1;
    for (int b : lvl) {
      if (b < 0 || b >= std::max(n, 1))
        return fail(HierarchyViolation::kIndexOutOfRange,
                    "level " + std::to_string(i + 1) + " has block index " + std::to_string(b) + " outside [0, n)");
      max_block = std::max(max_block, b);
    }
    std::vector<char> seen(static_cast<std::size_t>(max_block + 1), 0);
    for (int b : lvl) seen[static_cast<std::size_t>(b)] = 1;
    for (int b = 0; b <= max_block; ++b)
      if (!seen[static_cast<std::size_t>(b)])
        return fail(HierarchyViolation::kEmptyBlock,
                    "level " + std::to_string(i + 1) + " block " + std::to_string(b) + " is empty");
    report.signature.push_back(max_block + 1);
  }
  for (std::size_t i = 1; i < report.signature.size(); ++i)
    if (report.signature[i] < report.signature[i - 1])
      return fail(HierarchyViolation::kNonMonotoneSignature,
                  "signature decreases between levels " + std::to_string(i) + " and " + std::to_string(i + 1));
  // Nestedness: each block at level i has a single parent at level i-1.
  for (std::size_t i = 1; i < levels.size(); ++i) {
    std::vector<int> parent(static_cast<std::size_t>(report.signature[i]), -1);
    for (int v = 0; v < n; ++v) {
      const int b = levels[i][static_cast<std::size_t>(v)];
      const int p = levels[i - 1][static_cast<std::size_t>(v)];
      auto& slot = parent[static_cast<std::size_t>(b)];
      if (slot == -1) {
        slot = p;
      } else if (slot != p) {
        return fail(HierarchyViolation::kNotNested, "level " + std::to_string(i + 1) + " block " + std::to_string(b) +
                                                        " spans level " + std::to_string(i) + " blocks " +
                                                        std::to_string(slot) + " and " + std::to_string(p));
      }
    }
  }
  return report;
}

HierarchicalFunction::HierarchicalFunction(std::vector<std::vector<int>> levels) : assignment_(std::move(levels)) {
  const int n = assignment_.empty() ? 0 : static_cast<int>(assignment_[0].size());
  auto report = validate_hierarchy(assignment_, n);
  if (!report.ok) throw std::invalid_argument("invalid hierarchy: " + report.message);
  signature_ = std::move(report.signature);
}

HierarchicalFunction HierarchicalFunction::single_level(std::vector<int> assignment) {
  std::vector<std::vector<int>> levels;
  levels.push_back(std::move(assignment));
  return HierarchicalFunction(std::move(levels));
}

bool HierarchicalFunction::valid(const BlockRef& ref) const {
  return ref.level >= 0 && ref.level < levels() && ref.index >= 0 && ref.index < block_count(ref.level);
}

std::vector<VertexSet> HierarchicalFunction::blocks(int level) const {
  std::vector<VertexSet> out(static_cast<std::size_t>(block_count(level)));
  const auto& lvl = level_assignment(level);
  for (std::size_t v = 0; v < lvl.size(); ++v) out[static_cast<std::size_t>(lvl[v])].push_back(static_cast<int>(v));
  return out;
}

VertexSet block(const HierarchicalFunction& h, const BlockRef& ref) {
  if (!h.valid(ref))
    throw std::out_of_range("unknown block (level " + std::to_string(ref.level) + ", index " +
                            std::to_string(ref.index) + ")");
  VertexSet out;
  const auto& lvl = h.level_assignment(ref.level);
  for (std::size_t v = 0; v < lvl.size(); ++v)
    if (lvl[v] == ref.index) out.push_back(static_cast<int>(v));
  return out;
}

VertexSet parent_merge(const HierarchicalFunction& h, const BlockRef& ref) {
  auto members = block(h, ref);
  if (ref.level == 0) return members;
  const int parent = h(members.front(), ref.level - 1);
  return block(h, {ref.level - 1, parent});
}

std::vector<int> siblings(const HierarchicalFunction& h, const BlockRef& ref) {
  if (!h.valid(ref)) throw std::out_of_range("unknown block");
  std::vector<int> out;
  if (ref.level == 0) {
    out.resize(static_cast<std::size_t>(h.block_count(0)));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  std::set<int> found;
  for (int v : parent_merge(h, ref)) found.insert(h(v, ref.level));
  return {found.begin(), found.end()};
}

InterestSet InterestSet::resolve(const HierarchicalFunction& h, std::vector<BlockRef> refs) {
  InterestSet out;
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (refs[i] == refs[j]) throw std::invalid_argument("interest set: repeated block reference");
  for (const auto& r : refs) out.resolved.push_back(block(h, r));
  out.refs = std::move(refs);
  return out;
}

VertexSet InterestSet::vertices() const {
  std::set<int> all;
  for (const auto& s : resolved) all.insert(s.begin(), s.end());
  return {all.begin(), all.end()};
}

// ---------------------------------------------------------------------------
// Isomorphism machinery

namespace {

// Stable colour refinement on a weighted adjacency, seeded with `initial`.
std::vector<int> refine_colors(const Eigen::MatrixXd& w, std::vector<int> colors) {
  const auto n = static_cast<int>(w.rows());
  int classes = static_cast<int>(std::set<int>(colors.begin(), colors.end()).size());
  for (int round = 0; round <= n; ++round) {
    using Signature = std::pair<int, std::vector<std::pair<int, double>>>;
    std::map<Signature, int> ids;
    std::vector<Signature> sigs(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      auto& s = sigs[static_cast<std::size_t>(v)];
      s.first = colors[static_cast<std::size_t>(v)];
      for (int u = 0; u < n; ++u)
        if (w(v, u) != 0.0) s.second.emplace_back(colors[static_cast<std::size_t>(u)], w(v, u));
      std::sort(s.second.begin(), s.second.end());
      ids.emplace(s, 0);
    }
    int next = 0;
    for (auto& [sig, id] : ids) id = next++;
    for (int v = 0; v < n; ++v) colors[static_cast<std::size_t>(v)] = ids[sigs[static_cast<std::size_t>(v)]];
    if (next == classes) break;
    classes = next;
  }
  return colors;
}

// Backtracking search for a bijection f: rows(a) -> rows(b) preserving
// weights and colours (color_a[v] == color_b[f(v)]).
class Matcher {
 public:
  Matcher(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::vector<int> color_a, std::vector<int> color_b,
          std::int64_t budget)
      : a_(a), b_(b), color_a_(std::move(color_a)), color_b_(std::move(color_b)), budget_(budget) {
    const auto n = static_cast<int>(a.rows());
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), 0);
    // Rarest colour first; ties by connectivity to earlier choices.
    std::map<int, int> freq;
    for (int c : color_a_) ++freq[c];
    std::stable_sort(order_.begin(), order_.end(), [&](int x, int y) {
      return freq[color_a_[static_cast<std::size_t>(x)]] < freq[color_a_[static_cast<std::size_t>(y)]];
    });
    image_.assign(static_cast<std::size_t>(n), -1);
    used_.assign(static_cast<std::size_t>(n), 0);
  }

  // nullopt when the node budget is exhausted.
  std::optional<bool> run() {
    if (a_.rows() != b_.rows()) return false;
    auto ca = color_a_, cb = color_b_;
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb) return false;
    const auto found = search(0);
    if (exhausted_) return std::nullopt;
    return found;
  }

  const std::vector<int>& mapping() const { return image_; }

 private:
  bool search(std::size_t depth) {
    if (depth == order_.size()) return true;
    if (budget_ >= 0 && ++nodes_ > budget_) {
      exhausted_ = true;
      return false;
    }
    const int v = order_[depth];
    for (int t = 0; t < static_cast<int>(b_.rows()); ++t) {
      if (used_[static_cast<std::size_t>(t)] || color_b_[static_cast<std::size_t>(t)] != color_a_[static_cast<std::size_t>(v)])
        continue;
      bool consistent = true;
      for (std::size_t d = 0; d < depth && consistent; ++d) {
        const int u = order_[d];
        const int s = image_[static_cast<std::size_t>(u)];
        consistent = a_(v, u) == b_(t, s);
      }
      if (!consistent) continue;
      image_[static_cast<std::size_t>(v)] = t;
      used_[static_cast<std::size_t>(t)] = 1;
      if (search(depth + 1)) return true;
      image_[static_cast<std::size_t>(v)] = -1;
      used_[static_cast<std::size_t>(t)] = 0;
      if (exhausted_) return false;
    }
    return false;
  }

  const Eigen::MatrixXd& a_;
  const Eigen::MatrixXd& b_;
  std::vector<int> color_a_, color_b_;
  std::vector<int> order_, image_;
  std::vector<char> used_;
  std::int64_t budget_;
  std::int64_t nodes_ = 0;
  bool exhausted_ = false;
};

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

std::optional<std::vector<int>> find_automorphism_mapping(const Graph& g, std::span<const int> from,
                                                          std::span<const int> to) {
  if (from.size() != to.size()) return std::nullopt;
  const int n = g.size();
  const Eigen::MatrixXd w = g.dense();
  // Colour 1 marks `from` on the source side and `to` on the target side;
  // refining each side separately keeps the constraint sigma(from) = to.
  std::vector<int> src(static_cast<std::size_t>(n), 0), dst(static_cast<std::size_t>(n), 0);
  for (int v : from) src[static_cast<std::size_t>(v)] = 1;
  for (int v : to) dst[static_cast<std::size_t>(v)] = 1;
  // Refine on the disjoint union so colour ids are comparable across sides.
  std::vector<int> init(src);
  init.insert(init.end(), dst.begin(), dst.end());
  const auto colors = refine_colors(block_diagonal(w, w), init);
  std::vector<int> ca(colors.begin(), colors.begin() + n), cb(colors.begin() + n, colors.end());
  Matcher matcher(w, w, ca, cb, -1);
  const auto result = matcher.run();
  if (!result.value_or(false)) return std::nullopt;
  return matcher.mapping();
}

std::optional<bool> isomorphic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::int64_t budget) {
  if (a.rows() != b.rows()) return false;
  const auto n = a.rows();
  const auto colors = refine_colors(block_diagonal(a, b), std::vector<int>(static_cast<std::size_t>(2 * n), 0));
  std::vector<int> ca(colors.begin(), colors.begin() + n), cb(colors.begin() + n, colors.end());
  Matcher matcher(a, b, ca, cb, budget);
  return matcher.run();
}

std::vector<int> iso_equivalence_class(const Graph& g, const HierarchicalFunction& h, const BlockRef& ref,
                                       const IsoOptions& options) {
  if (!h.valid(ref)) throw std::out_of_range("unknown block");
  if (options.mode == IsoMode::kExact && g.size() > options.exact_n_cap)
    throw std::invalid_argument("exact iso-equivalence requested for n = " + std::to_string(g.size()) +
                                " above cap " + std::to_string(options.exact_n_cap));
  const auto target = block(h, ref);
  const Eigen::MatrixXd target_adj = g.induced_dense(target);
  std::vector<int> out;
  for (int l : siblings(h, ref)) {
    if (l == ref.index) {
      out.push_back(l);
      continue;
    }
    const auto candidate = block(h, {ref.level, l});
    if (candidate.size() != target.size()) continue;
    if (options.mode == IsoMode::kExact) {
      if (find_automorphism_mapping(g, candidate, target)) out.push_back(l);
    } else {
      // A budget overrun means colour refinement already matched; accept.
      if (isomorphic(g.induced_dense(candidate), target_adj, options.heuristic_budget).value_or(true))
        out.push_back(l);
    }
  }
  return out;
}

}  // namespace hsn
