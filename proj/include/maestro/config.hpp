#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "maestro/curriculum.hpp"
#include "maestro/engine.hpp"
#include "maestro/lasertag.hpp"
#include "maestro/policy.hpp"
#include "maestro/ppo.hpp"

namespace maestro {

inline constexpr int kConfigSchemaVersion = 1;

// Training run description. Defaults are the LaserTag hyperparameters of the
// reference setup; small profiles override them in configs/.
struct ExperimentConfig {
  Method method = Method::kMaestro;
  // "lasertag", "matrix:random" or "matrix:<path to a matrix file>".
  std::string environment = "lasertag";
  std::vector<std::uint64_t> seeds = {0};
  long budget_updates = 40000;
  long max_iterations = 100'000'000;
  int num_workers = 1;
  long metrics_interval = 10;
  long save_interval = 100;  // 0 saves at the end only
  std::string output_dir = "runs/default";

  PpoConfig ppo;
  ReplayDistributionConfig replay{0.5, 0.3, 0.3};
  MaestroConfig maestro;
  int plr_capacity = 4000;
  double pfsp_power = 2.0;
  double pfsp_smoothing = 0.1;
  int win_window = 128;

  lasertag::GeneratorConfig generator;
  int max_episode_steps = lasertag::kDefaultMaxEpisodeSteps;
  Representation policy = Representation::kMlp;
  int hidden = 32;
  std::string fixed_level;

  int matrix_games = 6;
  int matrix_rows = 3;
  int matrix_cols = 3;
  std::uint64_t matrix_seed = 0;

  bool is_matrix() const { return environment.rfind("matrix:", 0) == 0; }
  void validate() const;
};

// Throws ConfigError naming the offending field; unknown keys are errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct EvalMethod {
  std::string name;
  std::vector<std::string> checkpoints;
};

struct EvalConfig {
  std::string kind = "round_robin";  // or "specialist"
  std::vector<EvalMethod> methods;
  std::vector<std::string> levels;  // held-out level names; "all" expands
  int episodes_per_pair = 5;
  std::uint64_t seed = 0;
  bool greedy = false;
  bool include_self = false;
  int max_episode_steps = lasertag::kDefaultMaxEpisodeSteps;
  int num_workers = 1;
  std::string output_dir = "runs/eval";

  long specialist_budget = 100;
  Method specialist_method = Method::kDrSp;
  int specialist_episodes = 10;
  PpoConfig specialist_ppo;
  int specialist_hidden = 32;

  void validate() const;
};

EvalConfig parse_eval_config(const nlohmann::json& j);
nlohmann::json to_json(const EvalConfig& cfg);
EvalConfig load_eval_config(const std::filesystem::path& path);

}  // namespace maestro
