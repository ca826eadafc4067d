#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hsn/graph.hpp"

namespace hsn {

enum class PadMode { kNaive, kCentered };

/// Pads an adjacency to n_target vertices. kNaive zero-pads. kCentered maps
/// the original block to 2A - J (J the hollow all-ones matrix) before
/// zero-padding, so padded vertices are neutral during matching.
Eigen::MatrixXd pad(const Eigen::MatrixXd& a, int n_target, PadMode mode = PadMode::kNaive);

/// ||A - P B P^T||_F^2 for the permutation with P[i][perm[i]] = 1.
double match_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<int>& perm);

struct MatchResult {
  double value = 0.0;
  std::vector<int> permutation;
};

inline constexpr int kExactMatchCap = 8;

/// Exhaustive minimum over all permutations; equal sizes required.
/// Throws std::invalid_argument above `cap` vertices.
MatchResult gm_min_exact(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int cap = kExactMatchCap);

struct MatchOptions {
  int restarts = 10;
  int max_iterations = 60;
  std::uint64_t seed = 0;
  /// Pairwise-swap polishing of the projected permutation.
  bool polish = true;
};

/// Frank-Wolfe over doubly stochastic matrices from the barycenter plus
/// `restarts` random starts, projected to permutations by linear assignment.
/// The reported value is attained by the returned permutation.
MatchResult gm_min_approx(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const MatchOptions& options = {});

/// Mean of ||A - P B P^T||_F^2 over all n! permutations, in closed form.
double gm_expected(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct Method2Config {
  PadMode pad = PadMode::kNaive;
  int exact_cap = kExactMatchCap;
  MatchOptions match;
};

/// min / mean matching ratio in [0, 1]; the smaller graph is padded first.
/// Exact matching is used when the padded size is within exact_cap.
double delta_method2(const Eigen::MatrixXd& gi, const Eigen::MatrixXd& gj, const Method2Config& config = {});

struct Method1Config {
  /// Common embedding dimension; 0 picks the smaller elbow of the two spectra.
  int dim = 0;
  int max_dim = 8;
  /// Gaussian kernel bandwidth; 0 uses the median pooled pairwise distance.
  double bandwidth = 0.0;
  /// Sign alignment is exhaustive up to this many dimensions.
  int max_sign_dims = 10;
};

/// Biased squared kernel mean discrepancy between two point sets with
/// k(x, y) = exp(-|x - y|^2 / (2 h^2)).
double kernel_mean_discrepancy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double bandwidth);

/// Median of the pooled pairwise distances (0 if fewer than two points).
double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Statistic minimised over per-dimension sign flips of `y` (bandwidth
/// recomputed per flip when config.bandwidth == 0), before squashing.
double aligned_discrepancy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Method1Config& config = {});

/// Re-embeds both graphs at a common dimension, takes the sign-aligned kernel
/// discrepancy s and returns s / (1 + s).
double delta_method1(const Graph& gi, const Graph& gj, const Method1Config& config = {});

/// Jaccard similarity of two vertex sets.
double jaccard(const VertexSet& a, const VertexSet& b);

/// 0 when the candidate's Jaccard overlap with some interesting block reaches
/// `threshold` (exact equality at the default 1), else 1.
double delta_oracle01(const VertexSet& candidate, const std::vector<VertexSet>& interesting, double threshold = 1.0);

enum class DissimKind { kMethod1, kMethod2, kOracle01 };

/// A subgraph identified by its host graph and (sorted) vertex set.
struct Subgraph {
  const Graph* graph = nullptr;
  VertexSet vertices;
};

/// Configured dissimilarity. Smaller means more similar; values lie in [0, 1].
struct Dissimilarity {
  DissimKind kind = DissimKind::kMethod2;
  Method1Config method1;
  Method2Config method2;
  double oracle_threshold = 1.0;

  double operator()(const Subgraph& reference, const Subgraph& candidate) const;
};

}  // namespace hsn
