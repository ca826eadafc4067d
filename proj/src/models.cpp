#include "hsn/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hsn {

namespace {

void check_probability_matrix(const Eigen::MatrixXd& lambda, const char* what) {
  if (lambda.rows() < 1 || lambda.rows() != lambda.cols())
    throw std::invalid_argument(std::string(what) + ": lambda must be a non-empty square matrix");
  for (Eigen::Index i = 0; i < lambda.rows(); ++i)
    for (Eigen::Index j = 0; j < lambda.cols(); ++j) {
      if (!(lambda(i, j) >= 0.0 && lambda(i, j) <= 1.0))
        throw std::invalid_argument(std::string(what) + ": lambda entries must lie in [0, 1]");
      if (lambda(i, j) != lambda(j, i)) throw std::invalid_argument(std::string(what) + ": lambda must be symmetric");
    }
}

void check_membership(const Eigen::VectorXd& pi, const std::vector<int>& fixed_sizes, Eigen::Index k,
                      const char* what) {
  if (!fixed_sizes.empty()) {
    if (static_cast<Eigen::Index>(fixed_sizes.size()) != k)
      throw std::invalid_argument(std::string(what) + ": one fixed size per block required");
    for (int s : fixed_sizes)
      if (s < 0) throw std::invalid_argument(std::string(what) + ": negative block size");
    return;
  }
  if (pi.size() != k) throw std::invalid_argument(std::string(what) + ": pi must have one entry per block");
  if ((pi.array() < 0.0).any()) throw std::invalid_argument(std::string(what) + ": pi entries must be >= 0");
  if (std::abs(pi.sum() - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + ": pi must sum to 1");
}

// Calls emit(k) for each index k in [0, count) that succeeds a Bernoulli(p)
// draw, in increasing order. Sparse probabilities use geometric skips.
template <typename Emit>
void bernoulli_indices(std::int64_t count, double p, Rng& rng, Emit&& emit) {
  if (count <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::int64_t k = 0; k < count; ++k) emit(k);
    return;
  }
  if (p > 0.25) {
    for (std::int64_t k = 0; k < count; ++k)
      if (uniform01(rng) < p) emit(k);
    return;
  }
  const double log_q = std::log1p(-p);
  std::int64_t k = -1;
  while (true) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(count - k)) return;
    k += static_cast<std::int64_t>(skip) + 1;
    if (k >= count) return;
    emit(k);
  }
}

void sample_within(std::span<const int> members, double p, Rng& rng, std::vector<WeightedEdge>& edges) {
  const auto m = static_cast<std::int64_t>(members.size());
  std::int64_t row = 0, row_start = 0;
  bernoulli_indices(m * (m - 1) / 2, p, rng, [&](std::int64_t k) {
    while (k >= row_start + (m - 1 - row)) {
      row_start += m - 1 - row;
      ++row;
    }
    const auto col = row + 1 + (k - row_start);
    edges.push_back({members[static_cast<std::size_t>(row)], members[static_cast<std::size_t>(col)], 1.0});
  });
}

void sample_between(std::span<const int> a, std::span<const int> b, double p, Rng& rng,
                    std::vector<WeightedEdge>& edges) {
  const auto nb = static_cast<std::int64_t>(b.size());
  bernoulli_indices(static_cast<std::int64_t>(a.size()) * nb, p, rng, [&](std::int64_t k) {
    edges.push_back({a[static_cast<std::size_t>(k / nb)], b[static_cast<std::size_t>(k % nb)], 1.0});
  });
}

// Block of each member, either consecutive fixed sizes or multinomial draws
// redrawn until every block is non-empty.
std::vector<int> draw_memberships(std::size_t count, const Eigen::VectorXd& pi, const std::vector<int>& fixed_sizes,
                                  Rng& rng) {
  std::vector<int> out(count, 0);
  if (!fixed_sizes.empty()) {
    std::size_t total = 0;
    for (int s : fixed_sizes) total += static_cast<std::size_t>(s);
    if (total != count)
      throw std::invalid_argument("fixed block sizes sum to " + std::to_string(total) + ", expected " +
                                  std::to_string(count));
    std::size_t pos = 0;
    for (std::size_t b = 0; b < fixed_sizes.size(); ++b)
      for (int i = 0; i < fixed_sizes[b]; ++i) out[pos++] = static_cast<int>(b);
    return out;
  }
  std::discrete_distribution<int> pick(pi.data(), pi.data() + pi.size());
  for (int attempt = 0; attempt < kMaxMembershipRedraws; ++attempt) {
    std::vector<int> counts(static_cast<std::size_t>(pi.size()), 0);
    for (auto& b : out) {
      b = pick(rng);
      ++counts[static_cast<std::size_t>(b)];
    }
    if (std::none_of(counts.begin(), counts.end(), [](int c) { return c == 0; })) return out;
  }
  throw std::runtime_error("membership sampling left a block empty after " + std::to_string(kMaxMembershipRedraws) +
                           " redraws");
}

// Depth-first sampler. `paths[v]` accumulates the local block index of v at
// each level.
void sample_node(const HsbmParams& node, std::span<const int> members, Rng& rng, std::vector<WeightedEdge>& edges,
                 std::vector<std::vector<int>>& paths) {
  const int k = node.blocks();
  const auto membership = draw_memberships(members.size(), node.pi, node.fixed_sizes, rng);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < members.size(); ++i) {
    groups[static_cast<std::size_t>(membership[i])].push_back(members[i]);
    paths[static_cast<std::size_t>(members[i])].push_back(membership[i]);
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      if (a == b) {
        if (node.is_leaf()) sample_within(groups[static_cast<std::size_t>(a)], node.lambda(a, a), rng, edges);
      } else {
        sample_between(groups[static_cast<std::size_t>(a)], groups[static_cast<std::size_t>(b)], node.lambda(a, b),
                       rng, edges);
      }
    }
  }
  if (node.is_leaf()) return;
  for (int a = 0; a < k; ++a)
    if (!groups[static_cast<std::size_t>(a)].empty())
      sample_node(node.children[static_cast<std::size_t>(a)], groups[static_cast<std::size_t>(a)], rng, edges, paths);
}

// Level labels ordered by parent first, then local index.
HierarchicalFunction hierarchy_from_paths(std::vector<std::vector<int>> paths, int depth) {
  for (auto& p : paths) p.resize(static_cast<std::size_t>(depth), 0);
  std::vector<std::vector<int>> levels(static_cast<std::size_t>(depth), std::vector<int>(paths.size()));
  for (int lvl = 0; lvl < depth; ++lvl) {
    std::map<std::vector<int>, int> ids;
    for (const auto& p : paths) ids.emplace(std::vector<int>(p.begin(), p.begin() + lvl + 1), 0);
    int next = 0;
    for (auto& [prefix, id] : ids) id = next++;
    for (std::size_t v = 0; v < paths.size(); ++v)
      levels[static_cast<std::size_t>(lvl)][v] =
          ids[std::vector<int>(paths[v].begin(), paths[v].begin() + lvl + 1)];
  }
  return HierarchicalFunction(std::move(levels));
}

std::int64_t choose2(std::int64_t k) { return k * (k - 1) / 2; }

}  // namespace

void SbmParams::validate() const {
  if (n < 0) throw std::invalid_argument("sbm: negative vertex count");
  check_probability_matrix(lambda, "sbm");
  check_membership(pi, fixed_sizes, lambda.rows(), "sbm");
}

int HsbmParams::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

void HsbmParams::validate(bool top) const {
  if (top && n < 0) throw std::invalid_argument("hsbm: negative vertex count");
  check_probability_matrix(lambda, "hsbm");
  check_membership(pi, fixed_sizes, lambda.rows(), "hsbm");
  if (is_leaf()) return;
  if (children.size() != static_cast<std::size_t>(blocks()))
    throw std::invalid_argument("hsbm: one child model per block required");
  for (Eigen::Index i = 0; i < lambda.rows(); ++i)
    if (lambda(i, i) != 0.0) throw std::invalid_argument("hsbm: lambda of a hierarchical level must be hollow");
  for (std::size_t j = 0; j < children.size(); ++j) {
    const auto& child = children[j];
    if (!fixed_sizes.empty() && !child.fixed_sizes.empty()) {
      int total = 0;
      for (int s : child.fixed_sizes) total += s;
      if (total != fixed_sizes[j]) throw std::invalid_argument("hsbm: child fixed sizes must sum to the block size");
    }
    child.validate(false);
  }
}

HsbmParams HsbmParams::from_sbm(const SbmParams& sbm) {
  HsbmParams out;
  out.n = sbm.n;
  out.lambda = sbm.lambda;
  out.pi = sbm.pi;
  out.fixed_sizes = sbm.fixed_sizes;
  return out;
}

SbmSample sample_sbm(const SbmParams& params, Rng& rng) {
  params.validate();
  const auto h = HsbmParams::from_sbm(params);
  std::vector<int> members(static_cast<std::size_t>(params.n));
  for (int v = 0; v < params.n; ++v) members[static_cast<std::size_t>(v)] = v;
  std::vector<WeightedEdge> edges;
  std::vector<std::vector<int>> paths(members.size());
  sample_node(h, members, rng, edges, paths);
  SbmSample out{Graph(params.n, edges), std::vector<int>(members.size())};
  for (std::size_t v = 0; v < members.size(); ++v) out.blocks[v] = paths[v][0];
  return out;
}

HsbmSample sample_hsbm(const HsbmParams& params, Rng& rng) {
  params.validate();
  std::vector<int> members(static_cast<std::size_t>(params.n));
  for (int v = 0; v < params.n; ++v) members[static_cast<std::size_t>(v)] = v;
  std::vector<WeightedEdge> edges;
  std::vector<std::vector<int>> paths(members.size());
  sample_node(params, members, rng, edges, paths);
  return {Graph(params.n, edges), hierarchy_from_paths(std::move(paths), params.depth())};
}

std::int64_t param_count(const SbmParams& params) {
  const std::int64_t k = params.blocks();
  return choose2(k) + k + (k - 1);
}

std::int64_t param_count(const HsbmParams& params) {
  const std::int64_t k = params.blocks();
  if (params.is_leaf()) return choose2(k) + k + (k - 1);
  std::int64_t total = choose2(k) + (k - 1);
  for (const auto& c : params.children) total += param_count(c);
  return total;
}

SimModelSpec SimModelSpec::reduced() {
  SimModelSpec spec;
  spec.top_blocks = 8;
  spec.size_base = 5.0;
  spec.size_range = 10.0;
  spec.twin_block = 5;
  return spec;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng) {
  Eigen::VectorXd out(alpha.size());
  double total = 0.0;
  do {
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      out(i) = std::gamma_distribution<double>(alpha(i), 1.0)(rng);
    }
    total = out.sum();
  } while (!(total > 0.0));
  return out / total;
}

std::vector<int> split_block_sizes(int total, const Eigen::VectorXd& proportions) {
  std::vector<int> sizes;
  int used = 0;
  for (Eigen::Index i = 0; i + 1 < proportions.size(); ++i) {
    const double tenth = std::round(proportions(i) * 10.0) / 10.0;
    const int s = static_cast<int>(std::lround(static_cast<double>(total) * tenth));
    if (s < 1) return {};
    sizes.push_back(s);
    used += s;
  }
  if (total - used < 1) return {};
  sizes.push_back(total - used);
  return sizes;
}

SimModel build_sim_model(const SimModelSpec& spec, Rng& rng) {
  if (spec.top_blocks < 1 || spec.motif_count < 1 || spec.sub_blocks < 1)
    throw std::invalid_argument("sim model: block and motif counts must be positive");
  if (spec.twin_block > spec.top_blocks) throw std::invalid_argument("sim model: twin block out of range");
  const auto k1 = static_cast<std::size_t>(spec.top_blocks);
  const auto k2 = static_cast<Eigen::Index>(spec.sub_blocks);
  SimModel model;

  model.block_sizes.resize(k1);
  for (auto& s : model.block_sizes)
    s = spec.size_unit * static_cast<int>(std::floor(spec.size_base + spec.size_range * uniform01(rng)));

  if (k2 != 3) throw std::invalid_argument("sim model: motifs are 3x3");
  const Eigen::VectorXd flat = Eigen::VectorXd::Ones(k2);
  for (int i = 0; i < spec.motif_count; ++i) {
    Eigen::MatrixXd x(k2, k2);
    for (Eigen::Index col = 0; col < k2; ++col) x.col(col) = sample_dirichlet(flat, rng);
    Eigen::MatrixXd gram = x.transpose() * x;
    gram = 0.5 * (gram + gram.transpose());
    model.motifs.emplace_back(gram);
  }

  std::uniform_int_distribution<int> pick_motif(0, spec.motif_count - 1);
  model.motif_of_block.resize(k1);
  for (std::size_t j = 0; j < k1; ++j) model.motif_of_block[j] = pick_motif(rng);
  if (spec.twin_block > 0) model.motif_of_block[static_cast<std::size_t>(spec.twin_block - 1)] = model.motif_of_block[0];

  std::uniform_real_distribution<double> omega_dist(spec.omega_low, spec.omega_high);
  model.child_sizes.resize(k1);
  for (std::size_t j = 0; j < k1; ++j) {
    Eigen::VectorXd omega(k2);
    for (Eigen::Index i = 0; i < k2; ++i) omega(i) = omega_dist(rng);
    std::vector<int> sizes;
    for (int attempt = 0; attempt < kMaxMembershipRedraws && sizes.empty(); ++attempt)
      sizes = split_block_sizes(model.block_sizes[j], sample_dirichlet(omega, rng));
    if (sizes.empty()) throw std::runtime_error("sim model: could not draw non-empty sub-block sizes");
    model.child_sizes[j] = std::move(sizes);
  }

  auto& top = model.params;
  top.n = 0;
  for (int s : model.block_sizes) top.n += s;
  top.lambda = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k1),
                                         spec.cross_probability);
  top.lambda.diagonal().setZero();
  top.pi.resize(static_cast<Eigen::Index>(k1));
  for (std::size_t j = 0; j < k1; ++j)
    top.pi(static_cast<Eigen::Index>(j)) = static_cast<double>(model.block_sizes[j]) / top.n;
  top.fixed_sizes = model.block_sizes;
  for (std::size_t j = 0; j < k1; ++j) {
    HsbmParams child;
    child.n = model.block_sizes[j];
    child.lambda = model.motifs[static_cast<std::size_t>(model.motif_of_block[j])];
    child.pi.resize(k2);
    for (Eigen::Index i = 0; i < k2; ++i)
      child.pi(i) = static_cast<double>(model.child_sizes[j][static_cast<std::size_t>(i)]) / child.n;
    child.fixed_sizes = model.child_sizes[j];
    top.children.push_back(std::move(child));
  }
  return model;
}

}  // namespace hsn
