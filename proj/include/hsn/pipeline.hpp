#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hsn/dissim.hpp"
#include "hsn/embed.hpp"
#include "hsn/io.hpp"
#include "hsn/models.hpp"
#include "hsn/nominate.hpp"
#include "hsn/user.hpp"
#include "json.hpp"

namespace hsn {

inline constexpr const char* kVersion = "1.0.0";

enum class UserScheme { kFirstAffirmative, kUhsn };

struct UserSweepConfig {
  double theta = 1.0;
  double gamma = 0.0;
  /// Reply counts to sweep; 0 is the no-user ranking.
  std::vector<int> replies{0, 1, 3, 5};
  UserScheme scheme = UserScheme::kFirstAffirmative;
  /// Rounds of UHSN re-ranking; ignored by the first-affirmative scheme.
  int rounds = 1;
  int per_block = 1;
};

struct EvaluationConfig {
  /// Loss is averaged over the top `loss_depth` ranks.
  int loss_depth = 1;
  /// Threshold on the 0/1 evaluation dissimilarity.
  double threshold = 0.5;
  int recall_m = 25;
};

struct SimulationConfig {
  SimModelSpec model = SimModelSpec::reduced();
  int replicates = 100;
  std::uint64_t seed = 1;
  /// Train on one sampled graph and nominate in a second draw of the same
  /// model; otherwise nominate the twin block within a single graph.
  bool pair_mode = true;
  /// 1-based top-level block designated as interesting.
  int interest_block = 1;
  int method = 2;
  Method1Config method1;
  Method2Config method2;
  EstimateConfig estimate;
  UserSweepConfig user;
  EvaluationConfig evaluation;
  unsigned threads = 1;

  SimulationConfig();
  void validate() const;
};

/// One row per (replicate or region, reply count).
struct ResultRow {
  int replicate = 0;
  int replies = 0;
  /// 1-based hierarchy level of the ranked blocks.
  int level = 1;
  /// 1-based rank of the estimated block matching the true block; size + 1 when absent.
  int position = 0;
  double loss = 0.0;
  double recall = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// Number of ranked candidate blocks.
  int candidates = 0;
};

/// Fraction of units whose true block sits at rank <= position (proportion)
/// or exactly at position (density); chance is the uniform-ranking proportion.
struct CurvePoint {
  int replies = 0;
  int position = 0;
  double proportion = 0.0;
  double density = 0.0;
  double chance = 0.0;
};

struct Failure {
  int unit = 0;
  std::string message;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<CurvePoint> curves;
  std::vector<Failure> failures;
  /// Unit labels (replicate index or region name), indexed by ResultRow::replicate.
  std::vector<std::string> units;
};

RunResult run_simulation(const SimulationConfig& config);

struct SyntheticConnectomeSpec {
  int regions = 6;
  int min_size = 12;
  int max_size = 30;
  /// Within-region sub-block probabilities are drawn in [low, high].
  double low = 0.05;
  double high = 0.6;
  double cross_region = 0.02;
  double coordinate_noise = 0.08;
};

struct ConnectomeConfig {
  std::optional<std::filesystem::path> edges;
  std::optional<std::filesystem::path> attributes;
  SyntheticConnectomeSpec synthetic;
  std::uint64_t seed = 1;
  /// Rank the given right-hemisphere regions instead of estimated clusters.
  bool true_partition = false;
  bool use_xyz = false;
  /// Forced cluster count; 0 uses the number of right-hemisphere regions.
  int clusters = 0;
  std::string left_label = "L";
  std::string right_label = "R";
  int min_region_size = 10;
  int method = 2;
  Method1Config method1;
  Method2Config method2;
  EstimateConfig estimate;
  UserSweepConfig user;
  EvaluationConfig evaluation;
  unsigned threads = 1;

  void validate() const;
};

/// Paired-hemisphere stand-in: region r has the same two-block motif in both
/// hemispheres, and mirrored coordinates.
GraphInput synthetic_connectome(const SyntheticConnectomeSpec& spec, std::uint64_t seed);

RunResult run_connectome(const ConnectomeConfig& config);

struct NominateConfig {
  std::filesystem::path edges;
  std::optional<std::filesystem::path> hierarchy;
  std::optional<std::filesystem::path> train_edges;
  std::filesystem::path train_hierarchy;
  /// 1-based (level, block) pairs in the training hierarchy.
  std::vector<BlockRef> train_blocks;
  /// 1-based level of candidate blocks; 0 uses the first training level.
  int level = 0;
  int method = 2;
  Method1Config method1;
  Method2Config method2;
  EstimateConfig estimate;
};

struct NominateResult {
  Ranking ranking;
  std::vector<std::string> ids;
};

NominateResult run_nominate(const NominateConfig& config);

Dissimilarity make_dissimilarity(int method, const Method1Config& m1, const Method2Config& m2);

/// Aggregates rows into per-reply-count curves over positions 1..max candidates.
std::vector<CurvePoint> build_curves(const std::vector<ResultRow>& rows);

/// Shortest round-trip-safe decimal text at `digits` significant digits.
std::string format_double(double value, int digits = 10);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& curves);
nlohmann::json results_to_json(const RunResult& result);

std::uint64_t fnv1a64(const std::string& text);

nlohmann::json simulation_config_to_json(const SimulationConfig& config);
SimulationConfig simulation_config_from_json(const nlohmann::json& j, SimulationConfig base = {});
nlohmann::json connectome_config_to_json(const ConnectomeConfig& config);
ConnectomeConfig connectome_config_from_json(const nlohmann::json& j, ConnectomeConfig base = {});

/// {version, seed, config, config_hash (FNV-1a of the canonical config text), extra...}.
nlohmann::json make_manifest(const nlohmann::json& config, std::uint64_t seed, const std::string& command);

/// Writes `text` to `path`, creating parent directories. Throws DataError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hsn
