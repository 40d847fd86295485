#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "maestro/config.hpp"
#include "maestro/engine.hpp"

namespace maestro {

inline constexpr const char* kMetricsCsvHeader =
    "update,episodes,branch_fraction,mean_score,buffer_size_total,population_size,wall_density_window,"
    "grid_size_window";

struct TrainOptions {
  // Serial collection regardless of num_workers.
  bool deterministic = false;
  // Continue from <out>/state.json, truncating logs to the saved offsets.
  bool resume = false;
  // Stops right after this update without the final save, like a killed
  // process. Negative disables it.
  long halt_after_updates = -1;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  long updates = 0;
  long iterations = 0;
  bool completed = false;
};

std::unique_ptr<TrainingDomain> make_domain(const ExperimentConfig& cfg, std::uint64_t seed);
EngineConfig make_engine_config(const ExperimentConfig& cfg, std::uint64_t seed, bool deterministic);

// One seed. Writes into out_dir:
//   config.json, events.jsonl, metrics.csv, curriculum.csv, state.json,
//   checkpoints/student.json, checkpoints/member_<id>.json, run_manifest.json
RunSummary run_training(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out_dir,
                        const TrainOptions& options);

// Every configured seed into <output_dir>/seed_<seed>.
std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg, const TrainOptions& options);

// Writes run_manifest.json listing every other file under dir with its hash.
void write_run_manifest(const std::filesystem::path& dir);

}  // namespace maestro
