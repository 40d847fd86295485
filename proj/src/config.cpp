#include "maestro/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

// Reads an object, remembering which keys were consumed so that leftovers can
// be reported as unknown.
class StrictReader {
 public:
  StrictReader(const nlohmann::json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  StrictReader child(const char* key) {
    seen_.insert(key);
    return StrictReader(j_.at(key), field(key));
  }

  std::string field(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <typename Fn>
void check(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    throw ConfigError(field, e.what());
  }
}

void read_ppo(StrictReader r, PpoConfig& p) {
  r.get("learning_rate", p.learning_rate);
  r.get("clip_range", p.clip_range);
  r.get("value_loss_coef", p.value_loss_coef);
  r.get("entropy_coef", p.entropy_coef);
  r.get("max_grad_norm", p.max_grad_norm);
  r.get("epochs", p.epochs);
  r.get("minibatches", p.minibatches);
  r.get("rollout_length", p.rollout_length);
  r.get("clip_value_loss", p.clip_value_loss);
  r.get("normalize_advantages", p.normalize_advantages);
  r.get("adam_eps", p.adam_eps);
  r.finish();
}

nlohmann::json ppo_json(const PpoConfig& p) {
  return {{"learning_rate", p.learning_rate},   {"clip_range", p.clip_range},
          {"value_loss_coef", p.value_loss_coef}, {"entropy_coef", p.entropy_coef},
          {"max_grad_norm", p.max_grad_norm},   {"epochs", p.epochs},
          {"minibatches", p.minibatches},       {"rollout_length", p.rollout_length},
          {"clip_value_loss", p.clip_value_loss}, {"normalize_advantages", p.normalize_advantages},
          {"adam_eps", p.adam_eps}};
}

Method read_method(StrictReader& r, const char* key, Method fallback) {
  std::string name = method_name(fallback);
  r.get(key, name);
  try {
    return parse_method(name);
  } catch (const ParameterError&) {
    throw ConfigError(r.field(key), "unknown method '" + name + "'");
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifactError("config file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
}

void check_schema(StrictReader& r) {
  int version = -1;
  r.get("schema_version", version);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "expected " + std::to_string(kConfigSchemaVersion));
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  if (environment != "lasertag" && !is_matrix()) {
    throw ConfigError("environment", "expected 'lasertag' or 'matrix:<fixture>'");
  }
  if (budget_updates < 1) throw ConfigError("budget_updates", "must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations", "must be positive");
  if (num_workers < 1) throw ConfigError("num_workers", "must be positive");
  if (metrics_interval < 1) throw ConfigError("metrics_interval", "must be positive");
  if (save_interval < 0) throw ConfigError("save_interval", "must be >= 0");
  check("ppo", [&] { ppo.validate(); });
  check("replay", [&] { replay.validate(); });
  check("maestro", [&] { maestro.validate(); });
  check("lasertag", [&] { generator.validate(); });
  if (plr_capacity < 1) throw ConfigError("plr.capacity", "must be positive");
  if (win_window < 1) throw ConfigError("pfsp.win_window", "must be positive");
  if (max_episode_steps < 1) throw ConfigError("lasertag.max_episode_steps", "must be positive");
  if (hidden < 1) throw ConfigError("lasertag.hidden", "must be positive");
  if (!fixed_level.empty()) check("lasertag.fixed_level", [&] { lasertag::heldout_level(fixed_level); });
  if (is_matrix()) {
    if (matrix_games < 1 || matrix_rows < 1 || matrix_cols < 1) throw ConfigError("matrix", "sizes must be positive");
  } else if (maestro.estimator == Estimator::kExact) {
    throw ConfigError("maestro.estimator", "exact scoring is only available for matrix environments");
  }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig c;
  StrictReader r(j, "");
  check_schema(r);
  c.method = read_method(r, "method", c.method);
  r.get("environment", c.environment);
  r.get("seeds", c.seeds);
  r.get("budget_updates", c.budget_updates);
  r.get("max_iterations", c.max_iterations);
  r.get("num_workers", c.num_workers);
  r.get("metrics_interval", c.metrics_interval);
  r.get("save_interval", c.save_interval);
  r.get("output_dir", c.output_dir);
  if (r.has("ppo")) read_ppo(r.child("ppo"), c.ppo);
  if (r.has("gae")) {
    StrictReader g = r.child("gae");
    g.get("gamma", c.ppo.gae.gamma);
    g.get("lambda", c.ppo.gae.lambda);
    g.finish();
  }
  if (r.has("replay")) {
    StrictReader p = r.child("replay");
    p.get("replay_probability", c.replay.replay_probability);
    p.get("staleness_coef", c.replay.staleness_coef);
    p.get("temperature", c.replay.temperature);
    std::string prioritization = "rank";
    p.get("prioritization", prioritization);
    if (prioritization != "rank") throw ConfigError("replay.prioritization", "only 'rank' is supported");
    p.finish();
  }
  if (r.has("maestro")) {
    StrictReader m = r.child("maestro");
    m.get("lambda", c.maestro.lambda);
    m.get("checkpoint_interval", c.maestro.checkpoint_interval);
    m.get("member_capacity", c.maestro.member_capacity);
    std::string estimator = estimator_name(c.maestro.estimator);
    m.get("estimator", estimator);
    try {
      c.maestro.estimator = parse_estimator(estimator);
    } catch (const ParameterError&) {
      throw ConfigError("maestro.estimator", "unknown estimator '" + estimator + "'");
    }
    m.finish();
  }
  if (r.has("plr")) {
    StrictReader p = r.child("plr");
    p.get("capacity", c.plr_capacity);
    p.finish();
  }
  if (r.has("pfsp")) {
    StrictReader p = r.child("pfsp");
    p.get("power", c.pfsp_power);
    p.get("smoothing", c.pfsp_smoothing);
    p.get("win_window", c.win_window);
    p.finish();
  }
  if (r.has("lasertag")) {
    StrictReader l = r.child("lasertag");
    l.get("min_size", c.generator.min_size);
    l.get("max_size", c.generator.max_size);
    l.get("max_wall_fraction", c.generator.max_wall_fraction);
    l.get("max_episode_steps", c.max_episode_steps);
    std::string policy = representation_name(c.policy);
    l.get("policy", policy);
    try {
      c.policy = parse_representation(policy);
    } catch (const ParameterError&) {
      throw ConfigError("lasertag.policy", "expected 'mlp' or 'tabular'");
    }
    l.get("hidden", c.hidden);
    l.get("fixed_level", c.fixed_level);
    l.finish();
  }
  if (r.has("matrix")) {
    StrictReader m = r.child("matrix");
    m.get("games", c.matrix_games);
    m.get("rows", c.matrix_rows);
    m.get("cols", c.matrix_cols);
    m.get("seed", c.matrix_seed);
    m.finish();
  }
  r.finish();
  c.ppo.num_workers = c.num_workers;
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"schema_version", kConfigSchemaVersion},
          {"method", method_name(c.method)},
          {"environment", c.environment},
          {"seeds", c.seeds},
          {"budget_updates", c.budget_updates},
          {"max_iterations", c.max_iterations},
          {"num_workers", c.num_workers},
          {"metrics_interval", c.metrics_interval},
          {"save_interval", c.save_interval},
          {"output_dir", c.output_dir},
          {"ppo", ppo_json(c.ppo)},
          {"gae", {{"gamma", c.ppo.gae.gamma}, {"lambda", c.ppo.gae.lambda}}},
          {"replay",
           {{"replay_probability", c.replay.replay_probability},
            {"staleness_coef", c.replay.staleness_coef},
            {"temperature", c.replay.temperature},
            {"prioritization", "rank"}}},
          {"maestro",
           {{"lambda", c.maestro.lambda},
            {"checkpoint_interval", c.maestro.checkpoint_interval},
            {"member_capacity", c.maestro.member_capacity},
            {"estimator", estimator_name(c.maestro.estimator)}}},
          {"plr", {{"capacity", c.plr_capacity}}},
          {"pfsp", {{"power", c.pfsp_power}, {"smoothing", c.pfsp_smoothing}, {"win_window", c.win_window}}},
          {"lasertag",
           {{"min_size", c.generator.min_size},
            {"max_size", c.generator.max_size},
            {"max_wall_fraction", c.generator.max_wall_fraction},
            {"max_episode_steps", c.max_episode_steps},
            {"policy", representation_name(c.policy)},
            {"hidden", c.hidden},
            {"fixed_level", c.fixed_level}}},
          {"matrix", {{"games", c.matrix_games}, {"rows", c.matrix_rows}, {"cols", c.matrix_cols}, {"seed", c.matrix_seed}}}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig c = parse_experiment_config(read_json_file(path));
  if (c.is_matrix() && c.environment != "matrix:random") {
    std::filesystem::path fixture = c.environment.substr(7);
    if (fixture.is_relative()) fixture = path.parent_path() / fixture;
    c.environment = "matrix:" + fixture.lexically_normal().string();
  }
  return c;
}

void EvalConfig::validate() const {
  if (kind != "round_robin" && kind != "specialist") {
    throw ConfigError("kind", "expected 'round_robin' or 'specialist'");
  }
  if (methods.empty()) throw ConfigError("methods", "must list at least one method");
  for (const auto& m : methods) {
    if (m.checkpoints.empty()) throw ConfigError("methods." + m.name, "lists no checkpoints");
  }
  if (kind == "round_robin" && methods.size() < 2) throw ConfigError("methods", "round robin needs two methods");
  if (levels.empty()) throw ConfigError("levels", "must list at least one level");
  for (const auto& l : levels) {
    if (l != "all") check("levels", [&] { lasertag::heldout_level(l); });
  }
  if (episodes_per_pair < 1) throw ConfigError("episodes_per_pair", "must be positive");
  if (max_episode_steps < 1) throw ConfigError("max_episode_steps", "must be positive");
  if (num_workers < 1) throw ConfigError("num_workers", "must be positive");
  if (specialist_budget < 1) throw ConfigError("specialist.budget_updates", "must be positive");
  if (specialist_episodes < 1) throw ConfigError("specialist.episodes", "must be positive");
  check("specialist.ppo", [&] { specialist_ppo.validate(); });
}

EvalConfig parse_eval_config(const nlohmann::json& j) {
  EvalConfig c;
  StrictReader r(j, "");
  check_schema(r);
  r.get("kind", c.kind);
  if (r.has("methods")) {
    nlohmann::json methods;
    r.get("methods", methods);
    if (!methods.is_array()) throw ConfigError("methods", "expected an array");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      StrictReader m(methods[i], "methods[" + std::to_string(i) + "]");
      EvalMethod em;
      m.get("name", em.name);
      m.get("checkpoints", em.checkpoints);
      m.finish();
      if (em.name.empty()) throw ConfigError(m.field("name"), "must be non-empty");
      c.methods.push_back(std::move(em));
    }
  }
  r.get("levels", c.levels);
  r.get("episodes_per_pair", c.episodes_per_pair);
  r.get("seed", c.seed);
  r.get("greedy", c.greedy);
  r.get("include_self", c.include_self);
  r.get("max_episode_steps", c.max_episode_steps);
  r.get("num_workers", c.num_workers);
  r.get("output_dir", c.output_dir);
  if (r.has("specialist")) {
    StrictReader s = r.child("specialist");
    s.get("budget_updates", c.specialist_budget);
    c.specialist_method = read_method(s, "method", c.specialist_method);
    s.get("episodes", c.specialist_episodes);
    s.get("hidden", c.specialist_hidden);
    if (s.has("ppo")) read_ppo(s.child("ppo"), c.specialist_ppo);
    s.finish();
  }
  r.finish();
  c.validate();
  return c;
}

nlohmann::json to_json(const EvalConfig& c) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : c.methods) methods.push_back({{"name", m.name}, {"checkpoints", m.checkpoints}});
  return {{"schema_version", kConfigSchemaVersion},
          {"kind", c.kind},
          {"methods", methods},
          {"levels", c.levels},
          {"episodes_per_pair", c.episodes_per_pair},
          {"seed", c.seed},
          {"greedy", c.greedy},
          {"include_self", c.include_self},
          {"max_episode_steps", c.max_episode_steps},
          {"num_workers", c.num_workers},
          {"output_dir", c.output_dir},
          {"specialist",
           {{"budget_updates", c.specialist_budget},
            {"method", method_name(c.specialist_method)},
            {"episodes", c.specialist_episodes},
            {"hidden", c.specialist_hidden},
            {"ppo", ppo_json(c.specialist_ppo)}}}};
}

EvalConfig load_eval_config(const std::filesystem::path& path) {
  EvalConfig c = parse_eval_config(read_json_file(path));
  for (auto& m : c.methods) {
    for (auto& ckpt : m.checkpoints) {
      std::filesystem::path p = ckpt;
      if (p.is_relative()) ckpt = (path.parent_path() / p).lexically_normal().string();
    }
  }
  return c;
}

}  // namespace maestro
