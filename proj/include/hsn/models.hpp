#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hsn/graph.hpp"
#include "hsn/random.hpp"

namespace hsn {

/// Stochastic blockmodel (n, K, Lambda, pi). When `fixed_sizes` is non-empty
/// it replaces multinomial membership: block b gets fixed_sizes[b]
/// consecutive vertices.
struct SbmParams {
  int n = 0;
  Eigen::MatrixXd lambda;
  Eigen::VectorXd pi;
  std::vector<int> fixed_sizes;

  int blocks() const { return static_cast<int>(lambda.rows()); }
  void validate() const;
};

/// Recursive hierarchical blockmodel node. A node without children is an SBM
/// over its vertices (diagonal of lambda allowed). A node with children has a
/// hollow lambda for cross-block edges and one child per block; the child's
/// vertices are those sampled into the block, so a child's `n` is ignored.
struct HsbmParams {
  int n = 0;
  Eigen::MatrixXd lambda;
  Eigen::VectorXd pi;
  std::vector<int> fixed_sizes;
  std::vector<HsbmParams> children;

  int blocks() const { return static_cast<int>(lambda.rows()); }
  bool is_leaf() const { return children.empty(); }
  int depth() const;
  void validate(bool top = true) const;

  static HsbmParams from_sbm(const SbmParams& sbm);
};

struct SbmSample {
  Graph graph;
  std::vector<int> blocks;
};

struct HsbmSample {
  Graph graph;
  HierarchicalFunction hierarchy;
};

/// Membership draws that leave a block empty are redrawn up to this many times.
inline constexpr int kMaxMembershipRedraws = 100;

SbmSample sample_sbm(const SbmParams& params, Rng& rng);
HsbmSample sample_hsbm(const HsbmParams& params, Rng& rng);

/// Free-parameter count: SBM C(K,2)+K+(K-1); hierarchical nodes contribute
/// C(K,2)+(K-1) for their hollow lambda and pi plus their children's counts.
std::int64_t param_count(const SbmParams& params);
std::int64_t param_count(const HsbmParams& params);

/// Generator settings for the two-level motif model used in the simulations.
struct SimModelSpec {
  int top_blocks = 16;
  int motif_count = 3;
  int sub_blocks = 3;
  double cross_probability = 0.01;
  /// Top-level block size = size_unit * floor(size_base + size_range * U(0,1)).
  int size_unit = 10;
  double size_base = 20.0;
  double size_range = 50.0;
  double omega_low = 2.0;
  double omega_high = 10.0;
  /// 1-based block whose motif is forced equal to block 1's; 0 disables.
  int twin_block = 9;

  static SimModelSpec reduced();
};

struct SimModel {
  HsbmParams params;
  std::vector<Eigen::Matrix3d> motifs;
  /// motif_of_block[j] indexes `motifs`.
  std::vector<int> motif_of_block;
  std::vector<int> block_sizes;
  std::vector<std::vector<int>> child_sizes;
};

SimModel build_sim_model(const SimModelSpec& spec, Rng& rng);

/// Proportions ~ Dirichlet(alpha) via normalised Gamma draws.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng);

/// Sizes of the sub-blocks of a block of `total` vertices from proportions:
/// all but the last are round(total * round_to_tenth(p_i)); the last takes
/// the remainder. Returns an empty vector when some size would be < 1.
std::vector<int> split_block_sizes(int total, const Eigen::VectorXd& proportions);

}  // namespace hsn
