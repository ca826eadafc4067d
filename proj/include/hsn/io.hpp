#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "hsn/graph.hpp"
#include "hsn/models.hpp"
#include "json.hpp"

namespace hsn {

/// Malformed or inconsistent input data. `line` is 1-based; 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Invalid configuration: unknown keys, out-of-range values, missing paths.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AttributeTable {
  std::vector<std::string> ids;
  std::vector<std::string> hemisphere;
  std::vector<std::string> region;
  /// n x 3 when coordinates are present, otherwise 0 x 3.
  Eigen::MatrixXd xyz;

  bool has_hemisphere() const { return !hemisphere.empty(); }
  bool has_region() const { return !region.empty(); }
  bool has_xyz() const { return xyz.rows() > 0; }
  int size() const { return static_cast<int>(ids.size()); }
};

struct GraphInput {
  Graph graph;
  /// ids[i] is the external name of vertex i.
  std::vector<std::string> ids;
  std::optional<AttributeTable> attributes;
};

/// Header row required; `id` is mandatory, other columns optional; x, y, z
/// come together. Duplicate ids are errors.
AttributeTable read_attributes(std::istream& in);

/// Rows `src,dst[,weight]`; an optional first row naming the columns is
/// skipped. Without attributes, ids are indexed in order of first appearance;
/// with attributes, endpoints must be listed in the table. Blank lines and
/// lines starting with '#' are ignored.
GraphInput read_edge_list(std::istream& in, const AttributeTable* attributes = nullptr);

GraphInput ingest(const std::filesystem::path& edges, const std::optional<std::filesystem::path>& attributes);

/// Rows `vertex_id,level_1_block,...,level_k_block` with 1-based blocks.
/// `index_of` maps external ids to vertices; when null, ids are 0-based
/// integers. Every vertex must appear exactly once.
HierarchicalFunction read_hierarchy(std::istream& in, int n,
                                    const std::unordered_map<std::string, int>* index_of = nullptr);
void write_hierarchy(std::ostream& out, const HierarchicalFunction& h, const std::vector<std::string>* ids = nullptr);

void write_vertex_map(std::ostream& out, const std::vector<std::string>& ids);

/// Model spec: {"n", "lambda": [[...]], "pi": [...] | "sizes": [...],
/// "children": [spec, ...]}. Throws ConfigError.
HsbmParams hsbm_from_json(const nlohmann::json& j);
nlohmann::json hsbm_to_json(const HsbmParams& params);

/// Simulation model keys mirror SimModelSpec field names; missing keys keep
/// defaults, unknown keys are errors.
SimModelSpec sim_spec_from_json(const nlohmann::json& j, SimModelSpec base = {});
nlohmann::json sim_spec_to_json(const SimModelSpec& spec);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Splits on commas and trims surrounding whitespace of each field.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hsn
