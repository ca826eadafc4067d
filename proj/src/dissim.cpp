#include "hsn/dissim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hsn/assignment.hpp"
#include "hsn/embed.hpp"
#include "hsn/random.hpp"

namespace hsn {

Eigen::MatrixXd pad(const Eigen::MatrixXd& a, int n_target, PadMode mode) {
  const auto n = a.rows();
  if (a.rows() != a.cols()) throw std::invalid_argument("pad: adjacency must be square");
  if (n_target < n)
    throw std::invalid_argument("pad: target size " + std::to_string(n_target) + " below current size " +
                                std::to_string(n));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_target, n_target);
  if (mode == PadMode::kNaive) {
    out.topLeftCorner(n, n) = a;
  } else {
    Eigen::MatrixXd centered = 2.0 * a - Eigen::MatrixXd::Ones(n, n);
    centered.diagonal().setZero();
    out.topLeftCorner(n, n) = centered;
  }
  return out;
}

double match_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<int>& perm) {
  const auto n = a.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int pi = perm[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = a(i, j) - b(pi, perm[static_cast<std::size_t>(j)]);
      total += diff * diff;
    }
  }
  return total;
}

MatchResult gm_min_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int cap) {
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("gm_min_exact: matrices must be square and of equal size (pad first)");
  if (a.rows() > cap)
    throw std::invalid_argument("gm_min_exact: size " + std::to_string(a.rows()) + " above exact cap " +
                                std::to_string(cap));
  std::vector<int> perm(static_cast<std::size_t>(a.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best{std::numeric_limits<double>::infinity(), perm};
  do {
    const double c = match_cost(a, b, perm);
    if (c < best.value) best = {c, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

Eigen::MatrixXd random_doubly_stochastic(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform01(rng) + 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    m = (m.array().colwise() / m.rowwise().sum().array()).matrix();
    m = (m.array().rowwise() / m.colwise().sum().array()).matrix();
  }
  return m;
}

// Change in match_cost when perm[i] and perm[j] are exchanged.
double swap_delta(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::vector<int>& perm, int i, int j) {
  const auto n = static_cast<int>(a.rows());
  auto touched = [&](const std::vector<int>& p) {
    double s = 0.0;
    for (int r : {i, j}) {
      const int pr = p[static_cast<std::size_t>(r)];
      for (int k = 0; k < n; ++k) {
        const int pk = p[static_cast<std::size_t>(k)];
        const double d1 = a(r, k) - b(pr, pk);
        s += d1 * d1;
        if (k != i && k != j) {
          const double d2 = a(k, r) - b(pk, pr);
          s += d2 * d2;
        }
      }
    }
    return s;
  };
  const double before = touched(perm);
  std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  const double after = touched(perm);
  std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  return after - before;
}

void polish(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, MatchResult& result) {
  const auto n = static_cast<int>(a.rows());
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (swap_delta(a, b, result.permutation, i, j) < -1e-12) {
          std::swap(result.permutation[static_cast<std::size_t>(i)], result.permutation[static_cast<std::size_t>(j)]);
          improved = true;
        }
  }
  result.value = match_cost(a, b, result.permutation);
}

}  // namespace

MatchResult gm_min_approx(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const MatchOptions& options) {
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("gm_min_approx: matrices must be square and of equal size (pad first)");
  const auto n = a.rows();
  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  MatchResult best{match_cost(a, b, identity), identity};
  if (n <= 1) return best;

  auto consider = [&](const std::vector<int>& perm) {
    const double c = match_cost(a, b, perm);
    if (c < best.value) best = {c, perm};
  };

  Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(n)));
  const Eigen::MatrixXd barycenter = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  for (int start = 0; start <= options.restarts; ++start) {
    Eigen::MatrixXd p = start == 0 ? barycenter : Eigen::MatrixXd(0.5 * (barycenter + random_doubly_stochastic(n, rng)));
    // Maximise <A, P B P^T>; its gradient is 2 A P B for symmetric inputs.
    Eigen::MatrixXd apb = a * p * b;
    Eigen::MatrixXd aq(n, n);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      const auto vertex = solve_assignment_max(apb);
      consider(vertex);
      const double fx = (apb.array() * p.array()).sum();
      double gq = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) gq += apb(i, vertex[static_cast<std::size_t>(i)]);
      const double lin = 2.0 * (gq - fx);
      if (lin <= 1e-12 * std::max(1.0, std::abs(fx))) break;
      // A Q is A with column vertex[k] taken from column k.
      for (Eigen::Index k = 0; k < n; ++k) aq.col(vertex[static_cast<std::size_t>(k)]) = a.col(k);
      const Eigen::MatrixXd aqb = aq * b;
      double fq = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) fq += aqb(i, vertex[static_cast<std::size_t>(i)]);
      // <A, D B D^T> with D = Q - P.
      const double quad = fq - 2.0 * gq + fx;
      double step = 1.0;
      if (quad < 0.0) step = std::min(1.0, -lin / (2.0 * quad));
      p *= 1.0 - step;
      for (Eigen::Index i = 0; i < n; ++i) p(i, vertex[static_cast<std::size_t>(i)]) += step;
      apb = (1.0 - step) * apb + step * aqb;
      if (step < 1e-9) break;
    }
    consider(solve_assignment_max(p));
  }
  if (options.polish) polish(a, b, best);
  return best;
}

double gm_expected(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("gm_expected: matrices must be square and of equal size (pad first)");
  const auto n = static_cast<double>(a.rows());
  if (a.rows() == 0) return 0.0;
  const double trace_a = a.trace(), trace_b = b.trace();
  const double off_a = a.sum() - trace_a, off_b = b.sum() - trace_b;
  double cross = trace_a * trace_b / n;
  if (a.rows() > 1) cross += off_a * off_b / (n * (n - 1.0));
  return a.squaredNorm() + b.squaredNorm() - 2.0 * cross;
}

double delta_method2(const Eigen::MatrixXd& gi, const Eigen::MatrixXd& gj, const Method2Config& config) {
  const auto n = static_cast<int>(std::max(gi.rows(), gj.rows()));
  const Eigen::MatrixXd a = pad(gi, n, config.pad);
  const Eigen::MatrixXd b = pad(gj, n, config.pad);
  const double mean = gm_expected(a, b);
  if (mean <= 1e-12 * (a.squaredNorm() + b.squaredNorm() + 1.0)) return 0.0;
  const double min = n <= config.exact_cap ? gm_min_exact(a, b, config.exact_cap).value
                                           : gm_min_approx(a, b, config.match).value;
  return std::clamp(min / mean, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Method 1

double kernel_mean_discrepancy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double bandwidth) {
  if (x.cols() != y.cols()) throw std::invalid_argument("kernel discrepancy: dimension mismatch");
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("kernel discrepancy: empty point set");
  const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
  auto mean_kernel = [&](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < q.rows(); ++j) s += std::exp(-(p.row(i) - q.row(j)).squaredNorm() * scale);
    return s / static_cast<double>(p.rows() * q.rows());
  };
  return std::max(0.0, mean_kernel(x, x) + mean_kernel(y, y) - 2.0 * mean_kernel(x, y));
}

double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd z(x.rows() + y.rows(), x.cols());
  z << x, y;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(z.rows() * (z.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = i + 1; j < z.rows(); ++j) d.push_back((z.row(i) - z.row(j)).norm());
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

double aligned_discrepancy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Method1Config& config) {
  if (x.cols() != y.cols()) throw std::invalid_argument("aligned discrepancy: dimension mismatch");
  const auto d = static_cast<int>(x.cols());
  const int flip_dims = std::min(d, config.max_sign_dims);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (1ULL << flip_dims); ++mask) {
    Eigen::MatrixXd yf = y;
    for (int k = 0; k < flip_dims; ++k)
      if (mask & (1ULL << k)) yf.col(k) *= -1.0;
    double h = config.bandwidth;
    if (h <= 0.0) {
      h = median_pairwise_distance(x, yf);
      if (h <= 0.0) {
        // Median collapsed; fall back to the mean pooled distance.
        Eigen::MatrixXd z(x.rows() + yf.rows(), d);
        z << x, yf;
        double total = 0.0;
        std::int64_t count = 0;
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          for (Eigen::Index j = i + 1; j < z.rows(); ++j, ++count) total += (z.row(i) - z.row(j)).norm();
        h = count > 0 ? total / static_cast<double>(count) : 0.0;
      }
      if (h <= 0.0) return 0.0;  // every point identical
    }
    best = std::min(best, kernel_mean_discrepancy(x, yf, h));
  }
  return best;
}

namespace {

Eigen::MatrixXd embed_at(const Graph& g, int d) {
  Embedding e = ase(g, std::min(d, g.size()));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.size(), d);
  out.leftCols(e.points.cols()) = e.points;
  return out;
}

}  // namespace

double delta_method1(const Graph& gi, const Graph& gj, const Method1Config& config) {
  if (gi.size() == 0 || gj.size() == 0) throw std::invalid_argument("delta_method1: graphs must be non-empty");
  int d = config.dim;
  if (d <= 0) {
    auto elbow = [&](const Graph& g) {
      const auto eig = top_eigenpairs(g, std::min(config.max_dim, g.size()));
      return select_dim(eig.values.cwiseAbs());
    };
    d = std::min(elbow(gi), elbow(gj));
  }
  const double s = aligned_discrepancy(embed_at(gi, d), embed_at(gj, d), config);
  return s / (1.0 + s);
}

double jaccard(const VertexSet& a, const VertexSet& b) {
  VertexSet sa(a), sb(b), common;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const auto uni = sa.size() + sb.size() - common.size();
  if (uni == 0) return 1.0;
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double delta_oracle01(const VertexSet& candidate, const std::vector<VertexSet>& interesting, double threshold) {
  for (const auto& b : interesting)
    if (jaccard(candidate, b) >= threshold) return 0.0;
  return 1.0;
}

double Dissimilarity::operator()(const Subgraph& reference, const Subgraph& candidate) const {
  switch (kind) {
    case DissimKind::kOracle01:
      return delta_oracle01(candidate.vertices, {reference.vertices}, oracle_threshold);
    case DissimKind::kMethod1:
      return delta_method1(reference.graph->induced(reference.vertices), candidate.graph->induced(candidate.vertices),
                           method1);
    case DissimKind::kMethod2:
      return delta_method2(reference.graph->induced_dense(reference.vertices),
                           candidate.graph->induced_dense(candidate.vertices), method2);
  }
  throw std::logic_error("unknown dissimilarity kind");
}

}  // namespace hsn
