#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "maestro/commands.hpp"

int main(int argc, char** argv) {
  using namespace maestro;
  CLI::App app{"MAESTRO curriculum engine: train, evaluate, analyse and plot."};
  app.require_subcommand(1);

  TrainArgs train;
  std::uint64_t train_seed = 0;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "Run the configured training loop");
  train_cmd->add_option("--config", train.config, "Experiment config (JSON)")->required();
  auto* seed_opt = train_cmd->add_option("--seed", train_seed, "Run only this seed");
  auto* out_opt = train_cmd->add_option("--out", train_out, "Output directory (overrides output_dir)");
  train_cmd->add_flag("--deterministic", train.deterministic, "Serial collection; bit-identical outputs");
  train_cmd->add_flag("--resume", train.resume, "Continue from the last saved state");
  // Testing hook: stop after N updates without the final save.
  train_cmd->add_option("--halt-after", train.halt_after_updates)->group("");

  EvalArgs eval;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Round-robin or specialist evaluation");
  eval_cmd->add_option("--config", eval.config, "Evaluation config (JSON)")->required();
  auto* eval_out_opt = eval_cmd->add_option("--out", eval_out, "Output directory");
  eval_cmd->add_flag("--deterministic", eval.deterministic, "Serial match execution");

  PlotArgs plot;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG charts from the CSVs of a results directory");
  plot_cmd->add_option("results", plot.results, "Results directory")->required();
  auto* plot_out_opt = plot_cmd->add_option("--out", plot_out, "SVG directory (default <results>/plots)");

  Table1Args table1;
  std::string fixture;
  auto* table1_cmd = app.add_subcommand("table1", "Joint vs. independent selection on the bundled regret table");
  auto* fixture_opt = table1_cmd->add_option("--fixture", fixture, "Alternative regret matrix file");

  LandscapeArgs landscape;
  std::string estimator;
  std::string landscape_out;
  auto* landscape_cmd = app.add_subcommand("landscape", "Regret of the student per (co-player, environment)");
  landscape_cmd->add_option("--run", landscape.run, "Training output directory of one seed")->required();
  landscape_cmd->add_option("--envs", landscape.envs, "Number of sampled environments")->check(CLI::PositiveNumber);
  auto* estimator_opt = landscape_cmd->add_option("--estimator", estimator, "maxmc, pvl or exact");
  landscape_cmd->add_option("--seed", landscape.seed, "Environment sampling seed");
  auto* landscape_out_opt = landscape_cmd->add_option("--out", landscape_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*train_cmd) {
    if (*seed_opt) train.seed = train_seed;
    if (*out_opt) train.out = train_out;
    return cmd_train(train, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (*eval_out_opt) eval.out = eval_out;
    return cmd_eval(eval, std::cout, std::cerr);
  }
  if (*plot_cmd) {
    if (*plot_out_opt) plot.out = plot_out;
    return cmd_plot(plot, std::cout, std::cerr);
  }
  if (*table1_cmd) {
    if (*fixture_opt) table1.fixture = fixture;
    return cmd_table1(table1, std::cout, std::cerr);
  }
  if (*landscape_cmd) {
    if (*estimator_opt) landscape.estimator = estimator;
    if (*landscape_out_opt) landscape.out = landscape_out;
    return cmd_landscape(landscape, std::cout, std::cerr);
  }
  return kExitFailure;
}
