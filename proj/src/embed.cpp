#include "hsn/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "hsn/random.hpp"

namespace hsn {

namespace {

constexpr int kDenseEigenLimit = 1200;

TopEigen sorted_by_magnitude(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, int count) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  TopEigen out;
  out.values.resize(count);
  out.vectors.resize(vectors.rows(), count);
  for (int i = 0; i < count; ++i) {
    out.values(i) = values(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

TopEigen subspace_iteration(const Eigen::SparseMatrix<double>& a, int count) {
  const auto n = a.rows();
  const auto block = std::min<Eigen::Index>(n, count + 12);
  Rng rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = normal(rng);
  Eigen::VectorXd previous = Eigen::VectorXd::Zero(count);
  TopEigen result;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd y = a * q;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Eigen::MatrixXd t = q.transpose() * (a * q);
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    result = sorted_by_magnitude(small.eigenvalues(), q * small.eigenvectors(), count);
    const double scale = std::max(1.0, std::abs(result.values(0)));
    if (iter > 2 && (result.values - previous).cwiseAbs().maxCoeff() < 1e-11 * scale) break;
    previous = result.values;
  }
  return result;
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double m = std::abs(vectors(i, j));
      if (m > best * (1.0 + 1e-12) + 1e-15) {
        best = m;
        arg = i;
      }
    }
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

Embedding embed_from_eigen(const TopEigen& eig, int d) {
  Embedding out;
  const auto n = eig.vectors.rows();
  const double top = eig.values.size() > 0 ? std::abs(eig.values(0)) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i)) > 1e-10 * std::max(top, 1.0)) ++rank;
  int keep = std::min(d, rank);
  if (keep < d)
    out.warning = "requested dimension " + std::to_string(d) + " exceeds numerical rank " + std::to_string(rank) +
                  "; truncated";
  if (keep == 0) {
    out.points = Eigen::MatrixXd::Zero(n, 1);
    out.spectrum = Eigen::VectorXd::Zero(1);
    return out;
  }
  Eigen::MatrixXd vectors = eig.vectors.leftCols(keep);
  fix_signs(vectors);
  out.spectrum = eig.values.head(keep).cwiseAbs();
  out.points = vectors * out.spectrum.cwiseSqrt().asDiagonal();
  return out;
}

}  // namespace

TopEigen top_eigenpairs(const Graph& g, int count) {
  const int n = g.size();
  count = std::clamp(count, 0, n);
  if (n == 0 || count == 0) return {Eigen::VectorXd(0), Eigen::MatrixXd(n, 0)};
  if (n <= kDenseEigenLimit || count * 4 >= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.dense());
    return sorted_by_magnitude(solver.eigenvalues(), solver.eigenvectors(), count);
  }
  return subspace_iteration(g.adjacency(), count);
}

Embedding ase(const Graph& g, int d) {
  if (d < 1) throw std::invalid_argument("ase: dimension must be >= 1");
  if (d > g.size()) throw std::invalid_argument("ase: dimension exceeds vertex count");
  return embed_from_eigen(top_eigenpairs(g, d), d);
}

int select_dim(const Eigen::VectorXd& spectrum) {
  if (spectrum.size() == 0) throw std::invalid_argument("select_dim: empty spectrum");
  std::vector<double> x(spectrum.data(), spectrum.data() + spectrum.size());
  for (auto& v : x) v = std::abs(v);
  std::sort(x.begin(), x.end(), std::greater<>());
  const auto p = x.size();
  if (p == 1) return 1;
  // With a shared variance the profile likelihood of split q is a decreasing
  // function of the pooled within-group sum of squares.
  int best_q = 1;
  double best_ss = std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q < p; ++q) {
    const double m1 = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q), 0.0) / static_cast<double>(q);
    const double m2 = std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(q), x.end(), 0.0) / static_cast<double>(p - q);
    double ss = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double m = i < q ? m1 : m2;
      ss += (x[i] - m) * (x[i] - m);
    }
    if (ss < best_ss * (1.0 - 1e-12) - 1e-300) {
      best_ss = ss;
      best_q = static_cast<int>(q);
    }
  }
  return best_q;
}

Embedding augment_features(const Embedding& e, const Eigen::MatrixXd& features, FeatureScaling scaling) {
  if (features.size() == 0 || features.cols() == 0) return e;
  if (features.rows() != e.points.rows())
    throw std::invalid_argument("augment_features: " + std::to_string(features.rows()) + " feature rows for " +
                                std::to_string(e.points.rows()) + " vertices");
  const auto n = e.points.rows();
  auto standardize = [&](const Eigen::VectorXd& col, bool& constant) {
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
    constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    if (scaling == FeatureScaling::kNone) return Eigen::VectorXd(col);
    if (constant) return Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    return Eigen::VectorXd((col.array() - mean) / sd);
  };
  std::vector<Eigen::VectorXd> columns;
  bool constant = false;
  for (Eigen::Index j = 0; j < e.points.cols(); ++j) columns.push_back(standardize(e.points.col(j), constant));
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    auto col = standardize(features.col(j), constant);
    if (!constant) columns.push_back(std::move(col));
  }
  Embedding out;
  out.spectrum = e.spectrum;
  out.warning = e.warning;
  out.points.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.points.col(static_cast<Eigen::Index>(j)) = columns[j];
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian mixture EM

namespace {

struct Mixture {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
};

struct EmRun {
  Mixture mixture;
  Eigen::MatrixXd responsibilities;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  double objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool degenerate = false;
};

constexpr double kVanished = 1e-10;

// Maximises the ridge-penalised likelihood: Sigma_k = (S_k + ridge I) / N_k.
void m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, double ridge, Mixture& mix) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto m = resp.cols();
  for (Eigen::Index k = 0; k < m; ++k) {
    const double nk = resp.col(k).sum();
    if (nk < kVanished) {
      mix.weights(k) = 0.0;
      continue;
    }
    mix.weights(k) = nk / static_cast<double>(n);
    Eigen::VectorXd mean = (x.transpose() * resp.col(k)) / nk;
    Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
    Eigen::MatrixXd scatter = centered.transpose() * (centered.array().colwise() * resp.col(k).array()).matrix();
    scatter += ridge * Eigen::MatrixXd::Identity(d, d);
    mix.means[static_cast<std::size_t>(k)] = std::move(mean);
    mix.covariances[static_cast<std::size_t>(k)] = (0.5 * (scatter + scatter.transpose())) / nk;
  }
}

// Fills responsibilities; returns false on a non-positive-definite covariance.
bool e_step(const Eigen::MatrixXd& x, const Mixture& mix, double ridge, Eigen::MatrixXd& resp, double& loglik,
            double& objective) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto m = mix.weights.size();
  Eigen::MatrixXd logp(n, m);
  double penalty = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (mix.weights(k) <= 0.0) {
      logp.col(k).setConstant(-std::numeric_limits<double>::infinity());
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(mix.covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd& l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    if (!std::isfinite(logdet)) return false;
    Eigen::MatrixXd centered = (x.rowwise() - mix.means[static_cast<std::size_t>(k)].transpose()).transpose();
    llt.matrixL().solveInPlace(centered);
    const Eigen::VectorXd maha = centered.colwise().squaredNorm().transpose();
    const double base = std::log(mix.weights(k)) - 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet);
    logp.col(k) = (base - 0.5 * maha.array()).matrix();
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    penalty += 0.5 * ridge * inv.trace();
  }
  loglik = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logp.row(i).maxCoeff();
    const double lse = top + std::log((logp.row(i).array() - top).exp().sum());
    loglik += lse;
    resp.row(i) = (logp.row(i).array() - lse).exp().matrix();
  }
  objective = loglik - penalty;
  return std::isfinite(objective);
}

Eigen::MatrixXd farthest_point_init(const Eigen::MatrixXd& x, int m, Rng& rng) {
  const auto n = x.rows();
  std::vector<Eigen::Index> centers;
  centers.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  Eigen::VectorXd dist = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < m) {
    Eigen::Index next = 0;
    dist.maxCoeff(&next);
    centers.push_back(next);
    dist = dist.cwiseMin((x.rowwise() - x.row(next)).rowwise().squaredNorm());
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      const double dd = (x.row(i) - x.row(centers[static_cast<std::size_t>(k)])).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = k;
      }
    }
    resp(i, best) = 1.0;
  }
  return resp;
}

EmRun run_em(const Eigen::MatrixXd& x, int m, double ridge, const GmmOptions& options, Rng& rng) {
  const auto d = x.cols();
  EmRun run;
  run.mixture.weights = Eigen::VectorXd::Zero(m);
  run.mixture.means.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
  run.mixture.covariances.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Identity(d, d));
  run.responsibilities = farthest_point_init(x, m, rng);
  m_step(x, run.responsibilities, ridge, run.mixture);
  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double loglik = 0.0, objective = 0.0;
    if (!e_step(x, run.mixture, ridge, run.responsibilities, loglik, objective)) {
      run.degenerate = true;
      return run;
    }
    run.iterations = iter + 1;
    run.log_likelihood = loglik;
    run.objective = objective;
    if (std::isfinite(previous)) {
      const double slack = 1e-8 * std::max(1.0, std::abs(previous));
      if (objective < previous - slack)
        throw std::logic_error("EM objective decreased from " + std::to_string(previous) + " to " +
                               std::to_string(objective));
      if (std::abs(objective - previous) < options.tolerance * std::max(1.0, std::abs(previous))) break;
    }
    previous = objective;
    m_step(x, run.responsibilities, ridge, run.mixture);
  }
  return run;
}

std::vector<int> hard_labels(const Eigen::MatrixXd& resp, int& blocks) {
  std::vector<int> raw(static_cast<std::size_t>(resp.rows()));
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    Eigen::Index k = 0;
    resp.row(i).maxCoeff(&k);
    raw[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  std::vector<int> remap(static_cast<std::size_t>(resp.cols()), -1);
  for (int k : raw) remap[static_cast<std::size_t>(k)] = 0;
  blocks = 0;
  for (auto& r : remap)
    if (r == 0) r = blocks++;
  for (auto& k : raw) k = remap[static_cast<std::size_t>(k)];
  return raw;
}

}  // namespace

PartitionEstimate gmm_fit(const Eigen::MatrixXd& points, const GmmOptions& options) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (n < 2) throw std::invalid_argument("gmm_fit: at least 2 points required");
  if (options.candidates.empty()) throw std::invalid_argument("gmm_fit: no candidate component counts");
  for (int m : options.candidates)
    if (m < 1 || m > n) throw std::invalid_argument("gmm_fit: candidate " + std::to_string(m) + " outside [1, n]");

  Eigen::RowVectorXd mean = points.colwise().mean();
  const double spread = (points.rowwise() - mean).array().square().sum() / static_cast<double>(n * std::max<Eigen::Index>(d, 1));
  const double base_ridge = options.ridge * (spread > 0.0 ? spread : 1.0);

  PartitionEstimate out;
  double best_bic = std::numeric_limits<double>::infinity();
  bool best_spurious = false;
  Eigen::MatrixXd best_resp;
  for (std::size_t c = 0; c < options.candidates.size(); ++c) {
    const int m = options.candidates[c];
    EmRun best, best_any;
    bool regularized = false;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
      double ridge = base_ridge;
      Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(m) * 1000003ULL + static_cast<std::uint64_t>(r));
      EmRun run = run_em(points, m, ridge, options, rng);
      for (int retry = 0; run.degenerate && retry < 6; ++retry) {
        ++out.degenerate_restarts;
        regularized = true;
        ridge *= 100.0;
        rng = make_rng(options.seed, static_cast<std::uint64_t>(m) * 1000003ULL + static_cast<std::uint64_t>(r));
        run = run_em(points, m, ridge, options, rng);
      }
      if (run.degenerate) continue;
      // Components too small to support a full covariance are spurious optima.
      const bool spurious = (run.mixture.weights.array() > 0.0 &&
                             run.mixture.weights.array() * static_cast<double>(n) < static_cast<double>(d + 1))
                                .any();
      if (spurious) {
        if (run.log_likelihood > best_any.log_likelihood) best_any = std::move(run);
      } else if (run.log_likelihood > best.log_likelihood) {
        best = std::move(run);
      }
    }
    const bool spurious = !std::isfinite(best.log_likelihood) && std::isfinite(best_any.log_likelihood);
    if (spurious) best = std::move(best_any);
    if (!std::isfinite(best.log_likelihood)) throw std::runtime_error("gmm_fit: every restart degenerated");
    const double dd = static_cast<double>(d);
    const double params = (m - 1) + m * dd + m * dd * (dd + 1.0) / 2.0;
    GmmFit fit;
    fit.components = m;
    fit.log_likelihood = best.log_likelihood;
    fit.objective = best.objective;
    fit.bic = -2.0 * best.log_likelihood + params * std::log(static_cast<double>(n));
    fit.iterations = best.iterations;
    fit.regularized = regularized;
    out.scores.push_back(fit);
    const bool first = best_resp.size() == 0;
    if (first || (best_spurious && !spurious) || (spurious == best_spurious && fit.bic < best_bic)) {
      best_spurious = spurious;
      best_bic = fit.bic;
      out.selected = m;
      best_resp = std::move(best.responsibilities);
    }
  }
  out.assignment = hard_labels(best_resp, out.blocks);
  return out;
}

HierarchyEstimate estimate_hierarchy(const Graph& g, const EstimateConfig& config) {
  Graph source = g;
  if (config.log_weights) {
    auto edges = g.edges();
    for (auto& e : edges) e.weight = std::log1p(e.weight);
    source = Graph(g.size(), edges);
  }
  Embedding embedding;
  if (config.dim > 0) {
    embedding = ase(source, std::min(config.dim, source.size()));
  } else {
    const auto eig = top_eigenpairs(source, std::min(std::max(config.max_dim, 1), source.size()));
    const int d = eig.values.size() > 0 ? select_dim(eig.values) : 1;
    embedding = embed_from_eigen(eig, d);
  }
  if (config.features.size() > 0) embedding = augment_features(embedding, config.features);
  auto partition = gmm_fit(embedding.points, config.gmm);
  auto hierarchy = HierarchicalFunction::single_level(partition.assignment);
  return {std::move(hierarchy), std::move(partition), std::move(embedding)};
}

}  // namespace hsn
