#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace maestro {

// Process exit codes shared by the CLI and the Python bindings.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingArtifact = 3;
inline constexpr int kExitData = 4;

struct TrainArgs {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool deterministic = false;
  bool resume = false;
  long halt_after_updates = -1;
};

struct EvalArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  bool deterministic = false;
};

struct PlotArgs {
  std::filesystem::path results;
  std::optional<std::filesystem::path> out;  // defaults to <results>/plots
};

struct Table1Args {
  std::optional<std::filesystem::path> fixture;  // bundled fixture when empty
};

struct LandscapeArgs {
  std::filesystem::path run;  // a training output directory (one seed)
  int envs = 16;
  std::optional<std::string> estimator;  // the run's estimator when empty
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;
};

// Each returns an exit code and never throws; diagnostics go to `err`.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_plot(const PlotArgs& args, std::ostream& out, std::ostream& err);
int cmd_table1(const Table1Args& args, std::ostream& out, std::ostream& err);
int cmd_landscape(const LandscapeArgs& args, std::ostream& out, std::ostream& err);

}  // namespace maestro
