// Command-line front end: theory, heatmap, verify, simulate, connectome, nominate.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hsn/io.hpp"
#include "hsn/pipeline.hpp"
#include "hsn/theory.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct Globals {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 1;
  std::string format = "csv";
  int digits = 6;
};

std::string fixed(double v, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, v);
  return buffer;
}

json load_config(const Globals& g) { return g.config ? hsn::read_json_file(*g.config) : json::object(); }

// Prints to stdout and, with --out, writes the same text to out/<name>.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  std::cout << text;
  if (g.out) hsn::write_text_file(fs::path(*g.out) / name, text);
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

struct TheoryArgs {
  int c = 50, t = 10, h = 5;
  double p = 0.0, q = 0.0;
  std::int64_t reps = 100000;
  int blocks = 0;
  bool clip = false;
};

void apply_theory_config(const json& j, TheoryArgs& a) {
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "c" && k != "t" && k != "h" && k != "p" && k != "q" && k != "reps" && k != "blocks" && k != "clip")
      throw hsn::ConfigError("unknown key '" + k + "' in theory config");
  }
  try {
    take(j, "c", a.c);
    take(j, "t", a.t);
    take(j, "h", a.h);
    take(j, "p", a.p);
    take(j, "q", a.q);
    take(j, "reps", a.reps);
    take(j, "blocks", a.blocks);
    take(j, "clip", a.clip);
  } catch (const json::exception& e) {
    throw hsn::ConfigError(std::string("theory config: ") + e.what());
  }
}

// Config-file values apply first; explicitly given flags win.
TheoryArgs merged_theory(const Globals& g, const TheoryArgs& flags, const CLI::App& sub) {
  TheoryArgs a;
  apply_theory_config(load_config(g), a);
  auto given = [&](const char* name) {
    const CLI::Option* option = sub.get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
  };
  if (given("--c")) a.c = flags.c;
  if (given("--t")) a.t = flags.t;
  if (given("--h")) a.h = flags.h;
  if (given("--p")) a.p = flags.p;
  if (given("--q")) a.q = flags.q;
  if (given("--reps")) a.reps = flags.reps;
  if (given("--blocks")) a.blocks = flags.blocks;
  if (given("--clip")) a.clip = flags.clip;
  return a;
}

void check_theory(const TheoryArgs& a) {
  try {
    hsn::TheoryParams{a.c, a.t, a.h, a.p, a.q}.validate();
  } catch (const std::invalid_argument& e) {
    throw hsn::ConfigError(e.what());
  }
}

void run_theory(const Globals& g, const TheoryArgs& a) {
  check_theory(a);
  const double prob = hsn::prob_general(a.c, a.t, a.h, a.p, a.q);
  const std::optional<double> rel =
      a.h < a.c ? std::optional<double>(hsn::relative_loss(a.c, a.t, a.h, a.p, a.q)) : std::nullopt;
  std::ostringstream out;
  if (g.format == "json") {
    json j = {{"c", a.c}, {"t", a.t}, {"h", a.h}, {"p", a.p}, {"q", a.q}, {"probability", prob}};
    j["relative_loss"] = rel ? json(*rel) : json(nullptr);
    out << j.dump(2) << '\n';
    emit(g, "theory.json", out.str());
  } else {
    out << "c,t,h,p,q,probability,relative_loss\n"
        << a.c << ',' << a.t << ',' << a.h << ',' << hsn::format_double(a.p) << ',' << hsn::format_double(a.q) << ','
        << fixed(prob, g.digits) << ',' << (rel ? fixed(*rel, g.digits) : "NA") << '\n';
    emit(g, "theory.csv", out.str());
  }
}

void run_heatmap(const Globals& g, const TheoryArgs& a) {
  if (a.c < 2) throw hsn::ConfigError("heatmap needs c >= 2");
  if (!(a.p >= 0.0 && a.p <= 1.0 && a.q >= 0.0 && a.q <= 1.0)) throw hsn::ConfigError("p and q must lie in [0, 1]");
  const Eigen::MatrixXd grid = hsn::heatmap_grid(a.c, a.p, a.q, a.clip);
  std::ostringstream out;
  if (g.format == "json") {
    json rows = json::array();
    for (Eigen::Index h = 0; h < grid.rows(); ++h) {
      json row = json::array();
      for (Eigen::Index t = 0; t < grid.cols(); ++t) row.push_back(grid(h, t));
      rows.push_back(row);
    }
    out << json{{"c", a.c}, {"p", a.p}, {"q", a.q}, {"clip", a.clip}, {"rows_h_cols_t", rows}}.dump() << '\n';
    emit(g, "heatmap.json", out.str());
    return;
  }
  out << "h\\t";
  for (int t = 1; t < a.c; ++t) out << ',' << t;
  out << '\n';
  for (int h = 1; h < a.c; ++h) {
    out << h;
    for (int t = 1; t < a.c; ++t) out << ',' << fixed(grid(h - 1, t - 1), g.digits);
    out << '\n';
  }
  emit(g, "heatmap.csv", out.str());
}

void run_verify(const Globals& g, const TheoryArgs& a) {
  check_theory(a);
  if (a.reps < 1) throw hsn::ConfigError("reps must be >= 1");
  const std::uint64_t seed = g.seed.value_or(1);
  hsn::McOptions options;
  options.total_blocks = a.blocks;
  options.threads = g.threads;
  hsn::McEstimate mc;
  try {
    mc = hsn::mc_verify({a.c, a.t, a.h, a.p, a.q}, a.reps, seed, options);
  } catch (const std::invalid_argument& e) {
    throw hsn::ConfigError(e.what());
  }
  const double formula = hsn::prob_general(a.c, a.t, a.h, a.p, a.q);
  const double z = mc.standard_error > 0.0 ? (mc.estimate - formula) / mc.standard_error : 0.0;
  std::ostringstream out;
  if (g.format == "json") {
    out << json{{"c", a.c},
                {"t", a.t},
                {"h", a.h},
                {"p", a.p},
                {"q", a.q},
                {"reps", a.reps},
                {"seed", seed},
                {"estimate", mc.estimate},
                {"standard_error", mc.standard_error},
                {"formula", formula},
                {"z", z}}
               .dump(2)
        << '\n';
    emit(g, "verify.json", out.str());
  } else {
    out << "c,t,h,p,q,reps,seed,estimate,standard_error,formula,z\n"
        << a.c << ',' << a.t << ',' << a.h << ',' << hsn::format_double(a.p) << ',' << hsn::format_double(a.q) << ','
        << a.reps << ',' << seed << ',' << fixed(mc.estimate, g.digits) << ',' << fixed(mc.standard_error, g.digits)
        << ',' << fixed(formula, g.digits) << ',' << fixed(z, 3) << '\n';
    emit(g, "verify.csv", out.str());
  }
}

// Writes results, curves, unit labels and the manifest; stdout gets the results table.
void emit_run(const Globals& g, const hsn::RunResult& result, const json& config, std::uint64_t seed,
              const std::string& command) {
  for (const auto& f : result.failures) std::cerr << "unit " << f.unit << " failed: " << f.message << '\n';
  std::ostringstream results, curves, units;
  if (g.format == "json") {
    results << hsn::results_to_json(result).dump(2) << '\n';
  } else {
    hsn::write_results_csv(results, result.rows);
    hsn::write_curves_csv(curves, result.curves);
  }
  units << "replicate,unit\n";
  for (std::size_t i = 0; i < result.units.size(); ++i) units << i << ',' << result.units[i] << '\n';
  std::cout << results.str();
  if (!g.out) return;
  const fs::path dir(*g.out);
  if (g.format == "json") {
    hsn::write_text_file(dir / "results.json", results.str());
  } else {
    hsn::write_text_file(dir / "results.csv", results.str());
    hsn::write_text_file(dir / "curves.csv", curves.str());
  }
  hsn::write_text_file(dir / "units.csv", units.str());
  json manifest = hsn::make_manifest(config, seed, command);
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"unit", f.unit}, {"message", f.message}});
  manifest["failures"] = failures;
  hsn::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (const auto& field : hsn::split_csv_line(text)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw hsn::ConfigError("expected a comma-separated integer list, got '" + text + "'");
    }
  }
  return values;
}

hsn::UserScheme parse_scheme(const std::string& s) {
  if (s == "uhsn") return hsn::UserScheme::kUhsn;
  if (s == "first_affirmative") return hsn::UserScheme::kFirstAffirmative;
  throw hsn::ConfigError("scheme must be 'uhsn' or 'first_affirmative'");
}

hsn::BlockRef parse_block(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw hsn::ConfigError("training block must look like LEVEL:BLOCK (1-based), got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical subgraph nomination with user-in-the-loop re-ranking"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--digits", g.digits, "Digits after the decimal point for printed values")->check(CLI::Range(1, 17));

  TheoryArgs ta;
  auto add_theory_flags = [&](CLI::App* sub, bool needs_t) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--c", ta.c, "Number of indistinguishable sibling blocks");
    if (needs_t) {
      sub->add_option("--t", ta.t, "User capacity");
      sub->add_option("--h", ta.h, "Rank cutoff");
    }
    sub->add_option("--p", ta.p, "False-negative rate 1 - theta");
    sub->add_option("--q", ta.q, "False-positive rate gamma");
  };
  CLI::App* theory = app.add_subcommand("theory", "Closed-form miss probability and relative loss");
  add_theory_flags(theory, true);
  CLI::App* heatmap = app.add_subcommand("heatmap", "Relative-loss grid over (h, t)");
  add_theory_flags(heatmap, false);
  heatmap->add_flag("--clip", ta.clip, "Cap entries at 1");
  CLI::App* verify = app.add_subcommand("verify", "Monte Carlo check of the closed form");
  add_theory_flags(verify, true);
  verify->add_option("--reps", ta.reps, "Monte Carlo replicates");
  verify->add_option("--blocks", ta.blocks, "Total blocks at the level (default 2c)");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulation study on the two-level motif model");
  std::optional<int> replicates, method, interest_block;
  std::optional<std::string> replies, scheme, mode;
  std::optional<double> theta, gamma;
  bool full_model = false;
  simulate->add_option("--replicates", replicates, "Replicates");
  simulate->add_option("--method", method, "Dissimilarity: 1 (kernel) or 2 (graph matching)");
  simulate->add_option("--replies", replies, "Comma-separated reply counts");
  simulate->add_option("--scheme", scheme, "first_affirmative or uhsn");
  simulate->add_option("--theta", theta, "P(1 | interesting vertex)");
  simulate->add_option("--gamma", gamma, "P(1 | other vertex)");
  simulate->add_option("--mode", mode, "pair or single")->check(CLI::IsMember({"pair", "single"}));
  simulate->add_option("--interest-block", interest_block, "1-based interesting top-level block");
  simulate->add_flag("--full", full_model, "Use the full-size model instead of the reduced one");

  CLI::App* connectome = app.add_subcommand("connectome", "Cross-hemisphere region nomination");
  std::optional<std::string> edges, attributes;
  bool true_partition = false, use_xyz = false;
  std::optional<int> clusters;
  connectome->add_option("--edges", edges, "Edge list CSV src,dst[,weight]");
  connectome->add_option("--attributes", attributes, "Attribute CSV id,hemisphere,region,x,y,z");
  connectome->add_flag("--true-partition", true_partition, "Rank the given regions instead of clusters");
  connectome->add_flag("--xyz", use_xyz, "Append coordinates to the embedding before clustering");
  connectome->add_option("--clusters", clusters, "Forced cluster count");
  connectome->add_option("--method", method, "Dissimilarity: 1 or 2");
  connectome->add_option("--replies", replies, "Comma-separated reply counts");
  connectome->add_option("--scheme", scheme, "first_affirmative or uhsn");

  CLI::App* nominate = app.add_subcommand("nominate", "Rank candidate blocks against training blocks");
  hsn::NominateConfig nc;
  std::string nominate_edges, train_hierarchy;
  std::optional<std::string> hierarchy, train_edges;
  std::vector<std::string> train_blocks;
  std::optional<int> level, blocks;
  nominate->add_option("--edges", nominate_edges, "Edge list of the graph to nominate in")->required();
  nominate->add_option("--hierarchy", hierarchy, "Candidate hierarchy file; estimated when absent");
  nominate->add_option("--train-edges", train_edges, "Edge list of the training graph (default: --edges)");
  nominate->add_option("--train-hierarchy", train_hierarchy, "Training hierarchy file")->required();
  nominate->add_option("--train-block", train_blocks, "Training block LEVEL:BLOCK (1-based), repeatable")->required();
  nominate->add_option("--level", level, "1-based candidate level");
  nominate->add_option("--blocks", blocks, "Forced number of estimated blocks");
  nominate->add_option("--method", method, "Dissimilarity: 1 or 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (theory->parsed()) run_theory(g, merged_theory(g, ta, *theory));
    if (heatmap->parsed()) run_heatmap(g, merged_theory(g, ta, *heatmap));
    if (verify->parsed()) {
      TheoryArgs a = merged_theory(g, ta, *verify);
      run_verify(g, a);
    }
    if (simulate->parsed()) {
      hsn::SimulationConfig base;
      if (full_model) base.model = hsn::SimModelSpec{};
      hsn::SimulationConfig c = hsn::simulation_config_from_json(load_config(g), base);
      if (g.seed) c.seed = *g.seed;
      if (replicates) c.replicates = *replicates;
      if (method) c.method = *method;
      if (replies) c.user.replies = parse_int_list(*replies);
      if (scheme) c.user.scheme = parse_scheme(*scheme);
      if (theta) c.user.theta = *theta;
      if (gamma) c.user.gamma = *gamma;
      if (mode) c.pair_mode = *mode == "pair";
      if (interest_block) c.interest_block = *interest_block;
      c.threads = g.threads;
      c.validate();
      const hsn::RunResult result = hsn::run_simulation(c);
      emit_run(g, result, hsn::simulation_config_to_json(c), c.seed, "simulate");
    }
    if (connectome->parsed()) {
      hsn::ConnectomeConfig c = hsn::connectome_config_from_json(load_config(g));
      if (g.seed) c.seed = *g.seed;
      if (edges) c.edges = *edges;
      if (attributes) c.attributes = *attributes;
      if (true_partition) c.true_partition = true;
      if (use_xyz) c.use_xyz = true;
      if (clusters) c.clusters = *clusters;
      if (method) c.method = *method;
      if (replies) c.user.replies = parse_int_list(*replies);
      if (scheme) c.user.scheme = parse_scheme(*scheme);
      c.threads = g.threads;
      c.validate();
      const hsn::RunResult result = hsn::run_connectome(c);
      emit_run(g, result, hsn::connectome_config_to_json(c), c.seed, "connectome");
    }
    if (nominate->parsed()) {
      nc.edges = nominate_edges;
      if (hierarchy) nc.hierarchy = *hierarchy;
      if (train_edges) nc.train_edges = *train_edges;
      nc.train_hierarchy = train_hierarchy;
      for (const auto& b : train_blocks) nc.train_blocks.push_back(parse_block(b));
      if (level) nc.level = *level;
      if (method) nc.method = *method;
      nc.estimate.gmm.seed = g.seed.value_or(1);
      nc.method2.match.seed = g.seed.value_or(1);
      if (blocks) nc.estimate.gmm.candidates = {*blocks};
      const hsn::NominateResult result = hsn::run_nominate(nc);
      std::ostringstream out;
      std::ostringstream map;
      hsn::write_vertex_map(map, result.ids);
      const auto& r = result.ranking;
      if (g.format == "json") {
        json rows = json::array();
        for (int i = 0; i < r.size(); ++i) {
          const int b = r.order[static_cast<std::size_t>(i)];
          json members = json::array();
          for (int v : r.blocks[static_cast<std::size_t>(b)]) members.push_back(result.ids[static_cast<std::size_t>(v)]);
          rows.push_back({{"rank", i + 1}, {"block", b + 1}, {"score", r.scores[static_cast<std::size_t>(i)]},
                          {"vertices", members}});
        }
        out << json{{"level", r.level + 1}, {"ranking", rows}}.dump(2) << '\n';
        emit(g, "ranking.json", out.str());
      } else {
        out << "rank,block,score,size,vertices\n";
        for (int i = 0; i < r.size(); ++i) {
          const int b = r.order[static_cast<std::size_t>(i)];
          const auto& members = r.blocks[static_cast<std::size_t>(b)];
          out << i + 1 << ',' << b + 1 << ',' << fixed(r.scores[static_cast<std::size_t>(i)], g.digits) << ','
              << members.size() << ',';
          for (std::size_t k = 0; k < members.size(); ++k)
            out << (k ? ";" : "") << result.ids[static_cast<std::size_t>(members[k])];
          out << '\n';
        }
        emit(g, "ranking.csv", out.str());
      }
      if (g.out) hsn::write_text_file(fs::path(*g.out) / "vertex_map.csv", map.str());
    }
  } catch (const hsn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hsn::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
