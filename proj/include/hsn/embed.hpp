#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsn/graph.hpp"

namespace hsn {

struct Embedding {
  /// n x d latent positions; row i belongs to vertex i of the source graph.
  Eigen::MatrixXd points;
  /// Magnitudes of the retained eigenvalues, descending.
  Eigen::VectorXd spectrum;
  /// Set when the requested dimension exceeded the numerical rank.
  std::optional<std::string> warning;

  int dimension() const { return static_cast<int>(points.cols()); }
};

/// Top-`count` eigenpairs of a symmetric matrix by eigenvalue magnitude,
/// ordered by decreasing magnitude. Dense solver for small graphs, block
/// subspace iteration otherwise.
struct TopEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
TopEigen top_eigenpairs(const Graph& g, int count);

/// Adjacency spectral embedding: U |S|^{1/2} from the top-d eigenpairs by
/// magnitude. Each column's sign is fixed so its largest-magnitude entry is
/// positive (first such entry on ties). Dimensions beyond the numerical
/// rank are dropped with a warning, keeping at least one column.
Embedding ase(const Graph& g, int d);

/// Profile-likelihood elbow of a magnitude spectrum (sorted descending
/// internally). Returns the size of the leading group, at least 1.
int select_dim(const Eigen::VectorXd& spectrum);

enum class FeatureScaling { kZScore, kNone };

/// Appends vertex features to an embedding. Both blocks are z-scored per
/// column under kZScore; zero-variance feature columns are dropped. An empty
/// feature matrix returns the embedding unchanged.
Embedding augment_features(const Embedding& e, const Eigen::MatrixXd& features,
                           FeatureScaling scaling = FeatureScaling::kZScore);

struct GmmOptions {
  /// Candidate component counts; BIC picks among them unless only one.
  std::vector<int> candidates{8};
  int restarts = 5;
  int max_iterations = 500;
  double tolerance = 1e-7;
  /// Covariance ridge relative to the mean per-column data variance.
  double ridge = 1e-6;
  std::uint64_t seed = 0;
};

struct GmmFit {
  int components = 0;
  double log_likelihood = 0.0;
  /// Penalised objective monitored by EM (log-likelihood minus the ridge prior term).
  double objective = 0.0;
  double bic = 0.0;
  int iterations = 0;
  bool regularized = false;
};

struct PartitionEstimate {
  /// Block of each point in [0, blocks).
  std::vector<int> assignment;
  int blocks = 0;
  /// One entry per candidate component count, in candidate order.
  std::vector<GmmFit> scores;
  int selected = 0;
  /// Restarts that hit a degenerate covariance and were re-run with a larger ridge.
  int degenerate_restarts = 0;
};

/// Full-covariance Gaussian mixture EM with farthest-point initialisation and
/// best-of-restarts selection. Empty components are dropped from the final
/// labelling, so `blocks` may be below the selected component count.
/// Restarts with a component of effective size below d+1 are used only when
/// no other restart converged, and such candidates lose BIC selection to any
/// candidate without one.
/// Throws std::invalid_argument for fewer than 2 points or candidates above n.
PartitionEstimate gmm_fit(const Eigen::MatrixXd& points, const GmmOptions& options);

struct EstimateConfig {
  /// Embedding dimension; 0 selects by profile likelihood over `max_dim` values.
  int dim = 0;
  int max_dim = 16;
  bool log_weights = false;
  GmmOptions gmm;
  /// Optional n x f vertex features appended after embedding.
  Eigen::MatrixXd features;
};

struct HierarchyEstimate {
  HierarchicalFunction hierarchy;
  PartitionEstimate partition;
  Embedding embedding;
};

/// ase -> optional augment_features -> gmm_fit, emitted as a one-level hierarchy.
HierarchyEstimate estimate_hierarchy(const Graph& g, const EstimateConfig& config);

}  // namespace hsn
