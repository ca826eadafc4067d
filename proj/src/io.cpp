#include "hsn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace hsn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& field, const std::string& what, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse " + what + " '" + field + "'", line);
  }
}

int parse_int(const std::string& field, const std::string& what, int line) {
  int v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError("cannot parse " + what + " '" + field + "'", line);
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

AttributeTable read_attributes(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("attribute table is empty");
  for (auto& h : header) h = lower(h);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = column("id"), hemi_col = column("hemisphere"), region_col = column("region");
  const int x_col = column("x"), y_col = column("y"), z_col = column("z");
  if (id_col < 0) throw DataError("attribute header lacks an 'id' column", line_no);
  const int xyz_count = (x_col >= 0) + (y_col >= 0) + (z_col >= 0);
  if (xyz_count != 0 && xyz_count != 3) throw DataError("coordinate columns x, y, z must appear together", line_no);

  AttributeTable table;
  std::vector<Eigen::Vector3d> coords;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                      line_no);
    const std::string& id = fields[static_cast<std::size_t>(id_col)];
    if (id.empty()) throw DataError("missing vertex id", line_no);
    if (!seen.insert(id).second) throw DataError("duplicate vertex id '" + id + "'", line_no);
    table.ids.push_back(id);
    if (hemi_col >= 0) table.hemisphere.push_back(fields[static_cast<std::size_t>(hemi_col)]);
    if (region_col >= 0) table.region.push_back(fields[static_cast<std::size_t>(region_col)]);
    if (xyz_count == 3)
      coords.emplace_back(parse_double(fields[static_cast<std::size_t>(x_col)], "x", line_no),
                          parse_double(fields[static_cast<std::size_t>(y_col)], "y", line_no),
                          parse_double(fields[static_cast<std::size_t>(z_col)], "z", line_no));
  }
  table.xyz.resize(static_cast<Eigen::Index>(coords.size()), 3);
  for (std::size_t i = 0; i < coords.size(); ++i) table.xyz.row(static_cast<Eigen::Index>(i)) = coords[i].transpose();
  return table;
}

GraphInput read_edge_list(std::istream& in, const AttributeTable* attributes) {
  GraphInput input;
  std::unordered_map<std::string, int> index_of;
  if (attributes != nullptr) {
    input.ids = attributes->ids;
    for (int i = 0; i < attributes->size(); ++i) index_of.emplace(attributes->ids[static_cast<std::size_t>(i)], i);
    input.attributes = *attributes;
  }
  auto vertex = [&](const std::string& id, int line_no) {
    if (id.empty()) throw DataError("empty endpoint id", line_no);
    const auto it = index_of.find(id);
    if (it != index_of.end()) return it->second;
    if (attributes != nullptr) throw DataError("endpoint '" + id + "' is not in the attribute table", line_no);
    const int next = static_cast<int>(input.ids.size());
    index_of.emplace(id, next);
    input.ids.push_back(id);
    return next;
  };

  std::vector<WeightedEdge> edges;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (fields.size() >= 2 && lower(fields[0]) == "src" && lower(fields[1]) == "dst") continue;
    }
    if (fields.size() != 2 && fields.size() != 3)
      throw DataError("expected 'src,dst[,weight]', found " + std::to_string(fields.size()) + " fields", line_no);
    const double w = fields.size() == 3 ? parse_double(fields[2], "weight", line_no) : 1.0;
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("weight must be finite and non-negative", line_no);
    const int u = vertex(fields[0], line_no);
    const int v = vertex(fields[1], line_no);
    if (u == v) throw DataError("self loop on '" + fields[0] + "'", line_no);
    edges.push_back({u, v, w});
  }
  input.graph = Graph(static_cast<int>(input.ids.size()), edges);
  return input;
}

GraphInput ingest(const std::filesystem::path& edges, const std::optional<std::filesystem::path>& attributes) {
  std::optional<AttributeTable> table;
  if (attributes) {
    std::ifstream in(*attributes);
    if (!in) throw ConfigError("cannot open attribute file " + attributes->string());
    table = read_attributes(in);
  }
  std::ifstream in(edges);
  if (!in) throw ConfigError("cannot open edge file " + edges.string());
  return read_edge_list(in, table ? &*table : nullptr);
}

HierarchicalFunction read_hierarchy(std::istream& in, int n, const std::unordered_map<std::string, int>* index_of) {
  std::vector<std::vector<int>> levels;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (lower(fields[0]) == "vertex_id") continue;
    }
    if (fields.size() < 2) throw DataError("hierarchy row needs a vertex id and at least one level", line_no);
    if (levels.empty()) levels.assign(fields.size() - 1, std::vector<int>(static_cast<std::size_t>(n), -1));
    if (fields.size() - 1 != levels.size()) throw DataError("inconsistent number of levels", line_no);
    int v = -1;
    if (index_of != nullptr) {
      const auto it = index_of->find(fields[0]);
      if (it == index_of->end()) throw DataError("unknown vertex '" + fields[0] + "'", line_no);
      v = it->second;
    } else {
      v = parse_int(fields[0], "vertex id", line_no);
    }
    if (v < 0 || v >= n) throw DataError("vertex id out of range", line_no);
    if (seen[static_cast<std::size_t>(v)]) throw DataError("vertex listed twice", line_no);
    seen[static_cast<std::size_t>(v)] = 1;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const int b = parse_int(fields[k], "block", line_no);
      if (b < 1) throw DataError("blocks are 1-based", line_no);
      levels[k - 1][static_cast<std::size_t>(v)] = b - 1;
    }
  }
  if (levels.empty()) throw DataError("hierarchy file is empty");
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DataError("hierarchy does not cover every vertex");
  const HierarchyReport report = validate_hierarchy(levels, n);
  if (!report.ok) throw DataError("invalid hierarchy: " + report.message);
  return HierarchicalFunction(std::move(levels));
}

void write_hierarchy(std::ostream& out, const HierarchicalFunction& h, const std::vector<std::string>* ids) {
  out << "vertex_id";
  for (int k = 1; k <= h.levels(); ++k) out << ",level_" << k << "_block";
  out << '\n';
  for (int v = 0; v < h.vertex_count(); ++v) {
    if (ids != nullptr)
      out << (*ids)[static_cast<std::size_t>(v)];
    else
      out << v;
    for (int k = 0; k < h.levels(); ++k) out << ',' << h(v, k) + 1;
    out << '\n';
  }
}

void write_vertex_map(std::ostream& out, const std::vector<std::string>& ids) {
  out << "index,id\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << ',' << ids[i] << '\n';
}

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + key + "' must be a non-empty square array");
  const auto k = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k)
      throw ConfigError("'" + key + "' must be a square array");
    for (Eigen::Index c = 0; c < k; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ConfigError("'" + key + "' entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

HsbmParams hsbm_node(const json& j, bool top) {
  check_keys(j, {"n", "lambda", "pi", "sizes", "children"}, "model spec");
  HsbmParams p;
  try {
    if (top) p.n = j.at("n").get<int>();
    p.lambda = matrix_from_json(j.at("lambda"), "lambda");
    if (j.contains("pi")) {
      const auto pi = j.at("pi").get<std::vector<double>>();
      p.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
    }
    if (j.contains("sizes")) p.fixed_sizes = j.at("sizes").get<std::vector<int>>();
    if (j.contains("children"))
      for (const auto& child : j.at("children")) p.children.push_back(hsbm_node(child, false));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
  return p;
}

// Children take their vertex counts from the parent's fixed sizes.
void propagate_sizes(HsbmParams& p) {
  if (p.children.empty()) return;
  if (p.fixed_sizes.size() != p.children.size())
    throw ConfigError("model spec: a node with children needs 'sizes' with one entry per child");
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    p.children[i].n = p.fixed_sizes[i];
    propagate_sizes(p.children[i]);
  }
}

}  // namespace

HsbmParams hsbm_from_json(const json& j) {
  HsbmParams p = hsbm_node(j, true);
  propagate_sizes(p);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
  return p;
}

json hsbm_to_json(const HsbmParams& params) {
  json j;
  j["n"] = params.n;
  json lambda = json::array();
  for (Eigen::Index r = 0; r < params.lambda.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < params.lambda.cols(); ++c) row.push_back(params.lambda(r, c));
    lambda.push_back(row);
  }
  j["lambda"] = lambda;
  if (params.pi.size() > 0) j["pi"] = std::vector<double>(params.pi.data(), params.pi.data() + params.pi.size());
  if (!params.fixed_sizes.empty()) j["sizes"] = params.fixed_sizes;
  if (!params.children.empty()) {
    j["children"] = json::array();
    for (const auto& c : params.children) {
      json cj = hsbm_to_json(c);
      cj.erase("n");
      j["children"].push_back(cj);
    }
  }
  return j;
}

SimModelSpec sim_spec_from_json(const json& j, SimModelSpec base) {
  check_keys(j,
             {"top_blocks", "motif_count", "sub_blocks", "cross_probability", "size_unit", "size_base", "size_range",
              "omega_low", "omega_high", "twin_block"},
             "sim model");
  try {
    base.top_blocks = j.value("top_blocks", base.top_blocks);
    base.motif_count = j.value("motif_count", base.motif_count);
    base.sub_blocks = j.value("sub_blocks", base.sub_blocks);
    base.cross_probability = j.value("cross_probability", base.cross_probability);
    base.size_unit = j.value("size_unit", base.size_unit);
    base.size_base = j.value("size_base", base.size_base);
    base.size_range = j.value("size_range", base.size_range);
    base.omega_low = j.value("omega_low", base.omega_low);
    base.omega_high = j.value("omega_high", base.omega_high);
    base.twin_block = j.value("twin_block", base.twin_block);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sim model: ") + e.what());
  }
  return base;
}

json sim_spec_to_json(const SimModelSpec& s) {
  return json{{"top_blocks", s.top_blocks},       {"motif_count", s.motif_count}, {"sub_blocks", s.sub_blocks},
              {"cross_probability", s.cross_probability}, {"size_unit", s.size_unit}, {"size_base", s.size_base},
              {"size_range", s.size_range},       {"omega_low", s.omega_low},     {"omega_high", s.omega_high},
              {"twin_block", s.twin_block}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace hsn
