#include "hsn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "hsn/random.hpp"

namespace hsn {

using nlohmann::json;

SimulationConfig::SimulationConfig() {
  estimate.gmm.candidates = {8};
  estimate.gmm.restarts = 3;
  estimate.dim = 8;
  estimate.max_dim = 8;
  method2.match.restarts = 2;
  method2.match.max_iterations = 30;
}

namespace {

void validate_user(const UserSweepConfig& u) {
  if (!(u.theta >= 0.0 && u.theta <= 1.0) || !(u.gamma >= 0.0 && u.gamma <= 1.0))
    throw ConfigError("user theta and gamma must lie in [0, 1]");
  if (u.replies.empty()) throw ConfigError("user replies list is empty");
  for (int r : u.replies)
    if (r < 0) throw ConfigError("user reply counts must be >= 0");
  if (u.rounds < 1) throw ConfigError("user rounds must be >= 1");
  if (u.per_block < 1) throw ConfigError("user per_block must be >= 1");
}

void validate_common(int method, const EstimateConfig& est, const EvaluationConfig& eval) {
  if (method != 1 && method != 2) throw ConfigError("method must be 1 or 2");
  if (est.gmm.candidates.empty()) throw ConfigError("estimate needs at least one candidate block count");
  for (int k : est.gmm.candidates)
    if (k < 1) throw ConfigError("candidate block counts must be >= 1");
  if (est.gmm.restarts < 1) throw ConfigError("gmm restarts must be >= 1");
  if (eval.loss_depth < 1) throw ConfigError("loss_depth must be >= 1");
  if (!(eval.threshold > 0.0 && eval.threshold < 1.0)) throw ConfigError("evaluation threshold must lie in (0, 1)");
  if (eval.recall_m < 1) throw ConfigError("recall_m must be >= 1");
}

}  // namespace

void SimulationConfig::validate() const {
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (interest_block < 1 || interest_block > model.top_blocks) throw ConfigError("interest_block out of range");
  if (!pair_mode && (model.twin_block < 1 || model.twin_block == interest_block))
    throw ConfigError("single-graph mode needs a twin block distinct from the interesting block");
  validate_user(user);
  validate_common(method, estimate, evaluation);
}

void ConnectomeConfig::validate() const {
  if (edges.has_value() != attributes.has_value()) throw ConfigError("connectome needs both --edges and --attributes");
  if (clusters < 0) throw ConfigError("clusters must be >= 0");
  if (min_region_size < 1) throw ConfigError("min_region_size must be >= 1");
  if (synthetic.regions < 1 || synthetic.min_size < 2 || synthetic.max_size < synthetic.min_size)
    throw ConfigError("synthetic connectome sizes are inconsistent");
  validate_user(user);
  validate_common(method, estimate, evaluation);
}

Dissimilarity make_dissimilarity(int method, const Method1Config& m1, const Method2Config& m2) {
  Dissimilarity d;
  d.kind = method == 1 ? DissimKind::kMethod1 : DissimKind::kMethod2;
  d.method1 = m1;
  d.method2 = m2;
  return d;
}

namespace {

// Scores the base ranking and each user-adjusted ranking for one unit.
// Reply streams restart per reply count, so larger counts extend the same draws.
std::vector<ResultRow> evaluate_unit(int unit, const Ranking& base, const Graph& g2, const VertexSet& truth,
                                     const UserSweepConfig& user, const EvaluationConfig& eval,
                                     std::uint64_t unit_seed) {
  const BlockOverlap overlap = block_overlap(base.blocks, truth);
  const std::vector<VertexSet> target{base.blocks[static_cast<std::size_t>(overlap.best_block)]};
  Dissimilarity delta_e;
  delta_e.kind = DissimKind::kOracle01;

  std::vector<ResultRow> rows;
  for (int replies : user.replies) {
    Ranking ranked = base;
    if (replies > 0 && !base.empty()) {
      const int per_block = user.scheme == UserScheme::kFirstAffirmative ? 1 : user.per_block;
      const int t = std::min(replies, base.size() * per_block);
      const UserModel model{user.theta, user.gamma, t};
      Rng eta_rng = make_rng(unit_seed, 1);
      Rng reply_rng = make_rng(unit_seed, 2);
      if (user.scheme == UserScheme::kUhsn && user.rounds > 1) {
        ranked = iterate_user(base, truth, model, user.rounds, per_block, eta_rng).ranking;
      } else {
        UserQuery query = select_eta(base, t, per_block, eta_rng);
        query.replies = sample_user(query.eta, truth, model, reply_rng);
        ranked = user.scheme == UserScheme::kFirstAffirmative ? first_affirmative_rerank(base, query)
                                                               : rerank(base, partition_labels(base, query));
      }
    }
    ResultRow row;
    row.replicate = unit;
    row.replies = replies;
    row.level = base.level + 1;
    row.position = ranked.empty() ? 1 : hit_curve(ranked, g2, target, delta_e, eval.threshold).position;
    row.loss = loss(ranked, g2, target, delta_e, eval.loss_depth, eval.threshold);
    row.recall = top_vertices_recall(ranked, truth, eval.recall_m);
    row.alpha = overlap.alpha;
    row.beta = overlap.beta;
    row.candidates = ranked.size();
    rows.push_back(row);
  }
  return rows;
}

VertexSet complement(int n, const VertexSet& removed) {
  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  for (int v : removed) gone[static_cast<std::size_t>(v)] = 1;
  VertexSet keep;
  for (int v = 0; v < n; ++v)
    if (!gone[static_cast<std::size_t>(v)]) keep.push_back(v);
  return keep;
}

// Maps global vertex ids into positions of the sorted `kept` list; ids not kept are dropped.
VertexSet to_local(const VertexSet& global, const VertexSet& kept) {
  VertexSet local;
  for (int v : global) {
    const auto it = std::lower_bound(kept.begin(), kept.end(), v);
    if (it != kept.end() && *it == v) local.push_back(static_cast<int>(it - kept.begin()));
  }
  return local;
}

// Runs fn for each unit in parallel; exceptions become failures instead of aborting the run.
RunResult run_units(int count, unsigned threads, const std::function<std::vector<ResultRow>(int)>& fn) {
  std::vector<std::vector<ResultRow>> rows(static_cast<std::size_t>(count));
  std::vector<std::optional<std::string>> errors(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    try {
      rows[i] = fn(static_cast<int>(i));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  RunResult result;
  for (int i = 0; i < count; ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (errors[s]) {
      result.failures.push_back({i, *errors[s]});
      continue;
    }
    result.rows.insert(result.rows.end(), rows[s].begin(), rows[s].end());
  }
  result.curves = build_curves(result.rows);
  return result;
}

}  // namespace

RunResult run_simulation(const SimulationConfig& config) {
  config.validate();
  const Dissimilarity base_delta = make_dissimilarity(config.method, config.method1, config.method2);
  RunResult result = run_units(config.replicates, config.threads, [&](int rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    Rng rng(rep_seed);
    const SimModel model = build_sim_model(config.model, rng);
    const HsbmSample train_sample = sample_hsbm(model.params, rng);
    const int ib = config.interest_block - 1;
    const VertexSet train = block(train_sample.hierarchy, {0, ib});

    Graph g2;
    VertexSet truth;
    if (config.pair_mode) {
      const HsbmSample target_sample = sample_hsbm(model.params, rng);
      g2 = target_sample.graph;
      truth = block(target_sample.hierarchy, {0, ib});
    } else {
      // Nominate among the remaining vertices of the same graph.
      const VertexSet kept = complement(train_sample.graph.size(), train);
      g2 = train_sample.graph.induced(kept);
      truth = to_local(block(train_sample.hierarchy, {0, config.model.twin_block - 1}), kept);
    }

    EstimateConfig est = config.estimate;
    est.gmm.seed = derive_seed(rep_seed, 3);
    const HierarchyEstimate estimate = estimate_hierarchy(g2, est);
    Dissimilarity delta = base_delta;
    delta.method2.match.seed = derive_seed(rep_seed, 4);
    const InterestSet training{{BlockRef{0, ib}}, {train}};
    const Ranking ranking = rank_subgraphs(training, train_sample.graph, estimate.hierarchy, g2, delta, 0);
    return evaluate_unit(rep, ranking, g2, truth, config.user, config.evaluation, derive_seed(rep_seed, 5));
  });
  for (int rep = 0; rep < config.replicates; ++rep) result.units.push_back(std::to_string(rep));
  return result;
}

GraphInput synthetic_connectome(const SyntheticConnectomeSpec& spec, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xc0);
  const int r_count = spec.regions;
  std::uniform_int_distribution<int> size_dist(spec.min_size, spec.max_size);
  std::uniform_real_distribution<double> prob(spec.low, spec.high);
  std::normal_distribution<double> noise(0.0, spec.coordinate_noise);

  std::vector<Eigen::Matrix2d> motifs(static_cast<std::size_t>(r_count));
  std::vector<double> split(static_cast<std::size_t>(r_count));
  std::vector<Eigen::Vector3d> centroid(static_cast<std::size_t>(r_count));
  for (int r = 0; r < r_count; ++r) {
    Eigen::Matrix2d m;
    m(0, 0) = prob(rng);
    m(1, 1) = prob(rng);
    m(0, 1) = m(1, 0) = prob(rng);
    motifs[static_cast<std::size_t>(r)] = m;
    split[static_cast<std::size_t>(r)] = 0.3 + 0.4 * uniform01(rng);
    centroid[static_cast<std::size_t>(r)] = Eigen::Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
  }

  HsbmParams params;
  const int top = 2 * r_count;
  params.lambda = spec.cross_region * (Eigen::MatrixXd::Ones(top, top) - Eigen::MatrixXd::Identity(top, top));
  for (int b = 0; b < top; ++b) {
    const int r = b % r_count;
    const int size = size_dist(rng);
    const int first = std::clamp(static_cast<int>(std::lround(split[static_cast<std::size_t>(r)] * size)), 1, size - 1);
    HsbmParams child;
    child.n = size;
    child.lambda = motifs[static_cast<std::size_t>(r)];
    child.fixed_sizes = {first, size - first};
    params.fixed_sizes.push_back(size);
    params.children.push_back(std::move(child));
    params.n += size;
  }
  const HsbmSample sample = sample_hsbm(params, rng);

  GraphInput input;
  input.graph = sample.graph;
  AttributeTable table;
  table.xyz.resize(params.n, 3);
  for (int v = 0; v < params.n; ++v) {
    const int b = sample.hierarchy(v, 0);
    const int r = b % r_count;
    const bool left = b < r_count;
    table.ids.push_back("v" + std::to_string(v));
    table.hemisphere.push_back(left ? "L" : "R");
    table.region.push_back("region" + std::to_string(r + 1));
    const Eigen::Vector3d& c = centroid[static_cast<std::size_t>(r)];
    const double x = (0.2 + c.x()) * (left ? -1.0 : 1.0);
    table.xyz.row(v) << x + noise(rng), c.y() + noise(rng), c.z() + noise(rng);
  }
  input.ids = table.ids;
  input.attributes = std::move(table);
  return input;
}

RunResult run_connectome(const ConnectomeConfig& config) {
  config.validate();
  const GraphInput input = config.edges ? ingest(*config.edges, config.attributes)
                                        : synthetic_connectome(config.synthetic, config.seed);
  if (!input.attributes || !input.attributes->has_hemisphere() || !input.attributes->has_region())
    throw DataError("connectome input needs 'hemisphere' and 'region' attribute columns");
  const AttributeTable& attr = *input.attributes;
  if (config.use_xyz && !attr.has_xyz()) throw DataError("use_xyz requires x, y, z attribute columns");

  std::map<std::string, VertexSet> left_regions, right_regions;
  VertexSet right;
  for (int v = 0; v < attr.size(); ++v) {
    const auto s = static_cast<std::size_t>(v);
    if (attr.hemisphere[s] == config.left_label) left_regions[attr.region[s]].push_back(v);
    if (attr.hemisphere[s] == config.right_label) {
      right_regions[attr.region[s]].push_back(v);
      right.push_back(v);
    }
  }
  std::vector<std::string> qualifying;
  for (const auto& [name, members] : left_regions) {
    const auto it = right_regions.find(name);
    if (static_cast<int>(members.size()) >= config.min_region_size && it != right_regions.end() &&
        static_cast<int>(it->second.size()) >= config.min_region_size)
      qualifying.push_back(name);
  }
  if (qualifying.empty()) throw DataError("no region has enough vertices in both hemispheres");

  const Graph g2 = input.graph.induced(right);
  HierarchicalFunction candidates;
  if (config.true_partition) {
    std::vector<int> assignment(right.size());
    int index = 0;
    for (const auto& [name, members] : right_regions) {
      for (int v : to_local(members, right)) assignment[static_cast<std::size_t>(v)] = index;
      ++index;
    }
    candidates = HierarchicalFunction::single_level(std::move(assignment));
  } else {
    EstimateConfig est = config.estimate;
    est.gmm.candidates = {config.clusters > 0 ? config.clusters : static_cast<int>(right_regions.size())};
    est.gmm.seed = derive_seed(config.seed, 3);
    if (config.use_xyz) {
      est.features.resize(static_cast<Eigen::Index>(right.size()), 3);
      for (std::size_t i = 0; i < right.size(); ++i)
        est.features.row(static_cast<Eigen::Index>(i)) = attr.xyz.row(right[i]);
    }
    candidates = estimate_hierarchy(g2, est).hierarchy;
  }

  Dissimilarity delta = make_dissimilarity(config.method, config.method1, config.method2);
  delta.method2.match.seed = derive_seed(config.seed, 4);
  RunResult result = run_units(static_cast<int>(qualifying.size()), config.threads, [&](int unit) {
    const std::string& name = qualifying[static_cast<std::size_t>(unit)];
    const InterestSet training{{}, {left_regions.at(name)}};
    const Ranking ranking = rank_subgraphs(training, input.graph, candidates, g2, delta, 0);
    const VertexSet truth = to_local(right_regions.at(name), right);
    return evaluate_unit(unit, ranking, g2, truth, config.user, config.evaluation,
                         derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(unit)));
  });
  result.units = qualifying;
  return result;
}

NominateResult run_nominate(const NominateConfig& config) {
  if (config.train_blocks.empty()) throw ConfigError("nominate needs at least one training block");
  if (config.method != 1 && config.method != 2) throw ConfigError("method must be 1 or 2");
  const GraphInput target = ingest(config.edges, std::nullopt);
  std::unordered_map<std::string, int> target_index;
  for (std::size_t i = 0; i < target.ids.size(); ++i) target_index.emplace(target.ids[i], static_cast<int>(i));

  const GraphInput train = config.train_edges ? ingest(*config.train_edges, std::nullopt) : target;
  std::unordered_map<std::string, int> train_index;
  for (std::size_t i = 0; i < train.ids.size(); ++i) train_index.emplace(train.ids[i], static_cast<int>(i));

  auto read_h = [](const std::filesystem::path& path, int n, const std::unordered_map<std::string, int>& index) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open hierarchy file " + path.string());
    return read_hierarchy(in, n, &index);
  };
  const HierarchicalFunction train_h = read_h(config.train_hierarchy, train.graph.size(), train_index);
  std::vector<BlockRef> refs;
  for (const auto& b : config.train_blocks) refs.push_back({b.level - 1, b.index - 1});
  InterestSet training;
  try {
    training = InterestSet::resolve(train_h, refs);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("training blocks: ") + e.what());
  }

  HierarchicalFunction candidates;
  int level = 0;
  if (config.hierarchy) {
    candidates = read_h(*config.hierarchy, target.graph.size(), target_index);
    level = config.level > 0 ? config.level - 1 : refs.front().level;
  } else {
    candidates = estimate_hierarchy(target.graph, config.estimate).hierarchy;
    if (config.level > 1) throw ConfigError("estimated candidates have a single level");
  }
  if (level >= candidates.levels()) throw ConfigError("candidate level exceeds the hierarchy depth");
  const Dissimilarity delta = make_dissimilarity(config.method, config.method1, config.method2);
  return {rank_subgraphs(training, train.graph, candidates, target.graph, delta, level), target.ids};
}

std::vector<CurvePoint> build_curves(const std::vector<ResultRow>& rows) {
  std::map<int, std::vector<const ResultRow*>> by_replies;
  int max_candidates = 0;
  for (const auto& r : rows) {
    by_replies[r.replies].push_back(&r);
    max_candidates = std::max(max_candidates, r.candidates);
  }
  std::vector<CurvePoint> curves;
  for (const auto& [replies, group] : by_replies) {
    const double count = static_cast<double>(group.size());
    for (int pos = 1; pos <= max_candidates; ++pos) {
      CurvePoint point;
      point.replies = replies;
      point.position = pos;
      for (const ResultRow* r : group) {
        point.proportion += r->position <= pos ? 1.0 : 0.0;
        point.density += r->position == pos ? 1.0 : 0.0;
        if (r->candidates > 0) point.chance += static_cast<double>(std::min(pos, r->candidates)) / r->candidates;
      }
      point.proportion /= count;
      point.density /= count;
      point.chance /= count;
      curves.push_back(point);
    }
  }
  return curves;
}

std::string format_double(double value, int digits) {
  if (value == 0.0) return "0";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return buffer;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "replicate,replies,level,position_of_true_block,loss_i_t,recall_at_25,alpha,beta\n";
  for (const auto& r : rows)
    out << r.replicate << ',' << r.replies << ',' << r.level << ',' << r.position << ',' << format_double(r.loss) << ','
        << format_double(r.recall) << ',' << format_double(r.alpha) << ',' << format_double(r.beta) << '\n';
}

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& curves) {
  out << "replies,position,proportion,density,chance\n";
  for (const auto& c : curves)
    out << c.replies << ',' << c.position << ',' << format_double(c.proportion) << ',' << format_double(c.density)
        << ',' << format_double(c.chance) << '\n';
}

json results_to_json(const RunResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"replicate", r.replicate},
                    {"replies", r.replies},
                    {"level", r.level},
                    {"position_of_true_block", r.position},
                    {"loss_i_t", r.loss},
                    {"recall_at_25", r.recall},
                    {"alpha", r.alpha},
                    {"beta", r.beta}});
  json curves = json::array();
  for (const auto& c : result.curves)
    curves.push_back({{"replies", c.replies},
                      {"position", c.position},
                      {"proportion", c.proportion},
                      {"density", c.density},
                      {"chance", c.chance}});
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"unit", f.unit}, {"message", f.message}});
  return {{"units", result.units}, {"results", rows}, {"curves", curves}, {"failures", failures}};
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; }))
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

json user_to_json(const UserSweepConfig& u) {
  return {{"theta", u.theta},
          {"gamma", u.gamma},
          {"replies", u.replies},
          {"scheme", u.scheme == UserScheme::kUhsn ? "uhsn" : "first_affirmative"},
          {"rounds", u.rounds},
          {"per_block", u.per_block}};
}

UserSweepConfig user_from_json(const json& j, UserSweepConfig u) {
  check_keys(j, {"theta", "gamma", "replies", "scheme", "rounds", "per_block"}, "user");
  u.theta = j.value("theta", u.theta);
  u.gamma = j.value("gamma", u.gamma);
  u.replies = j.value("replies", u.replies);
  u.rounds = j.value("rounds", u.rounds);
  u.per_block = j.value("per_block", u.per_block);
  if (j.contains("scheme")) {
    const auto s = j.at("scheme").get<std::string>();
    if (s == "uhsn")
      u.scheme = UserScheme::kUhsn;
    else if (s == "first_affirmative")
      u.scheme = UserScheme::kFirstAffirmative;
    else
      throw ConfigError("user scheme must be 'uhsn' or 'first_affirmative'");
  }
  return u;
}

json eval_to_json(const EvaluationConfig& e) {
  return {{"loss_depth", e.loss_depth}, {"threshold", e.threshold}, {"recall_m", e.recall_m}};
}

EvaluationConfig eval_from_json(const json& j, EvaluationConfig e) {
  check_keys(j, {"loss_depth", "threshold", "recall_m"}, "evaluation");
  e.loss_depth = j.value("loss_depth", e.loss_depth);
  e.threshold = j.value("threshold", e.threshold);
  e.recall_m = j.value("recall_m", e.recall_m);
  return e;
}

json estimate_to_json(const EstimateConfig& e) {
  return {{"dim", e.dim},
          {"max_dim", e.max_dim},
          {"log_weights", e.log_weights},
          {"blocks", e.gmm.candidates},
          {"restarts", e.gmm.restarts},
          {"max_iterations", e.gmm.max_iterations},
          {"tolerance", e.gmm.tolerance},
          {"ridge", e.gmm.ridge}};
}

EstimateConfig estimate_from_json(const json& j, EstimateConfig e) {
  check_keys(j, {"dim", "max_dim", "log_weights", "blocks", "restarts", "max_iterations", "tolerance", "ridge"},
             "estimate");
  e.dim = j.value("dim", e.dim);
  e.max_dim = j.value("max_dim", e.max_dim);
  e.log_weights = j.value("log_weights", e.log_weights);
  e.gmm.candidates = j.value("blocks", e.gmm.candidates);
  e.gmm.restarts = j.value("restarts", e.gmm.restarts);
  e.gmm.max_iterations = j.value("max_iterations", e.gmm.max_iterations);
  e.gmm.tolerance = j.value("tolerance", e.gmm.tolerance);
  e.gmm.ridge = j.value("ridge", e.gmm.ridge);
  return e;
}

json method1_to_json(const Method1Config& m) {
  return {{"dim", m.dim}, {"max_dim", m.max_dim}, {"bandwidth", m.bandwidth}, {"max_sign_dims", m.max_sign_dims}};
}

Method1Config method1_from_json(const json& j, Method1Config m) {
  check_keys(j, {"dim", "max_dim", "bandwidth", "max_sign_dims"}, "method1");
  m.dim = j.value("dim", m.dim);
  m.max_dim = j.value("max_dim", m.max_dim);
  m.bandwidth = j.value("bandwidth", m.bandwidth);
  m.max_sign_dims = j.value("max_sign_dims", m.max_sign_dims);
  return m;
}

json method2_to_json(const Method2Config& m) {
  return {{"pad", m.pad == PadMode::kCentered ? "centered" : "naive"},
          {"exact_cap", m.exact_cap},
          {"restarts", m.match.restarts},
          {"max_iterations", m.match.max_iterations},
          {"polish", m.match.polish}};
}

Method2Config method2_from_json(const json& j, Method2Config m) {
  check_keys(j, {"pad", "exact_cap", "restarts", "max_iterations", "polish"}, "method2");
  if (j.contains("pad")) {
    const auto s = j.at("pad").get<std::string>();
    if (s == "centered")
      m.pad = PadMode::kCentered;
    else if (s == "naive")
      m.pad = PadMode::kNaive;
    else
      throw ConfigError("method2 pad must be 'naive' or 'centered'");
  }
  m.exact_cap = j.value("exact_cap", m.exact_cap);
  m.match.restarts = j.value("restarts", m.match.restarts);
  m.match.max_iterations = j.value("max_iterations", m.match.max_iterations);
  m.match.polish = j.value("polish", m.match.polish);
  return m;
}

template <typename F>
auto guarded(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

json simulation_config_to_json(const SimulationConfig& c) {
  return {{"model", sim_spec_to_json(c.model)},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"pair_mode", c.pair_mode},
          {"interest_block", c.interest_block},
          {"method", c.method},
          {"method1", method1_to_json(c.method1)},
          {"method2", method2_to_json(c.method2)},
          {"estimate", estimate_to_json(c.estimate)},
          {"user", user_to_json(c.user)},
          {"evaluation", eval_to_json(c.evaluation)}};
}

SimulationConfig simulation_config_from_json(const json& j, SimulationConfig c) {
  return guarded("simulation config", [&] {
    check_keys(j,
               {"model", "replicates", "seed", "pair_mode", "interest_block", "method", "method1", "method2",
                "estimate", "user", "evaluation", "threads"},
               "simulation config");
    if (j.contains("model")) c.model = sim_spec_from_json(j.at("model"), c.model);
    c.replicates = j.value("replicates", c.replicates);
    c.seed = j.value("seed", c.seed);
    c.pair_mode = j.value("pair_mode", c.pair_mode);
    c.interest_block = j.value("interest_block", c.interest_block);
    c.method = j.value("method", c.method);
    c.threads = j.value("threads", c.threads);
    if (j.contains("method1")) c.method1 = method1_from_json(j.at("method1"), c.method1);
    if (j.contains("method2")) c.method2 = method2_from_json(j.at("method2"), c.method2);
    if (j.contains("estimate")) c.estimate = estimate_from_json(j.at("estimate"), c.estimate);
    if (j.contains("user")) c.user = user_from_json(j.at("user"), c.user);
    if (j.contains("evaluation")) c.evaluation = eval_from_json(j.at("evaluation"), c.evaluation);
    return c;
  });
}

json connectome_config_to_json(const ConnectomeConfig& c) {
  json j = {{"seed", c.seed},
            {"true_partition", c.true_partition},
            {"use_xyz", c.use_xyz},
            {"clusters", c.clusters},
            {"left_label", c.left_label},
            {"right_label", c.right_label},
            {"min_region_size", c.min_region_size},
            {"method", c.method},
            {"method1", method1_to_json(c.method1)},
            {"method2", method2_to_json(c.method2)},
            {"estimate", estimate_to_json(c.estimate)},
            {"user", user_to_json(c.user)},
            {"evaluation", eval_to_json(c.evaluation)}};
  if (c.edges) {
    j["edges"] = c.edges->string();
    j["attributes"] = c.attributes->string();
  } else {
    const auto& s = c.synthetic;
    j["synthetic"] = {{"regions", s.regions}, {"min_size", s.min_size},         {"max_size", s.max_size},
                      {"low", s.low},         {"high", s.high},                 {"cross_region", s.cross_region},
                      {"coordinate_noise", s.coordinate_noise}};
  }
  return j;
}

ConnectomeConfig connectome_config_from_json(const json& j, ConnectomeConfig c) {
  return guarded("connectome config", [&] {
    check_keys(j,
               {"edges", "attributes", "synthetic", "seed", "true_partition", "use_xyz", "clusters", "left_label",
                "right_label", "min_region_size", "method", "method1", "method2", "estimate", "user", "evaluation",
                "threads"},
               "connectome config");
    if (j.contains("edges")) c.edges = j.at("edges").get<std::string>();
    if (j.contains("attributes")) c.attributes = j.at("attributes").get<std::string>();
    if (j.contains("synthetic")) {
      const json& s = j.at("synthetic");
      check_keys(s, {"regions", "min_size", "max_size", "low", "high", "cross_region", "coordinate_noise"}, "synthetic");
      auto& t = c.synthetic;
      t.regions = s.value("regions", t.regions);
      t.min_size = s.value("min_size", t.min_size);
      t.max_size = s.value("max_size", t.max_size);
      t.low = s.value("low", t.low);
      t.high = s.value("high", t.high);
      t.cross_region = s.value("cross_region", t.cross_region);
      t.coordinate_noise = s.value("coordinate_noise", t.coordinate_noise);
    }
    c.seed = j.value("seed", c.seed);
    c.true_partition = j.value("true_partition", c.true_partition);
    c.use_xyz = j.value("use_xyz", c.use_xyz);
    c.clusters = j.value("clusters", c.clusters);
    c.left_label = j.value("left_label", c.left_label);
    c.right_label = j.value("right_label", c.right_label);
    c.min_region_size = j.value("min_region_size", c.min_region_size);
    c.method = j.value("method", c.method);
    c.threads = j.value("threads", c.threads);
    if (j.contains("method1")) c.method1 = method1_from_json(j.at("method1"), c.method1);
    if (j.contains("method2")) c.method2 = method2_from_json(j.at("method2"), c.method2);
    if (j.contains("estimate")) c.estimate = estimate_from_json(j.at("estimate"), c.estimate);
    if (j.contains("user")) c.user = user_from_json(j.at("user"), c.user);
    if (j.contains("evaluation")) c.evaluation = eval_from_json(j.at("evaluation"), c.evaluation);
    return c;
  });
}

json make_manifest(const json& config, std::uint64_t seed, const std::string& command) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return {{"version", kVersion},
          {"command", command},
          {"seed", seed},
          {"config", config},
          {"config_hash", hash},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace hsn
