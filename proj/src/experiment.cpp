#include "maestro/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "maestro/errors.hpp"
#include "maestro/evaluation.hpp"
#include "maestro/io_util.hpp"
#include "maestro/lasertag_domain.hpp"
#include "maestro/matrix_domain.hpp"

namespace maestro {

namespace fs = std::filesystem;

namespace {

constexpr int kStateVersion = 1;
constexpr int kCurriculumWindow = 100;

// Running sums over the events since the last metrics row.
struct MetricsWindow {
  long events = 0;
  long replays = 0;
  double score_sum = 0.0;
  long trained = 0;
  double density_sum = 0.0;
  double size_sum = 0.0;
  long last_row_update = -1;

  void add(const EventRecord& r) {
    ++events;
    if (r.branch == "replay") ++replays;
    score_sum += r.score;
    if (r.trained) {
      ++trained;
      density_sum += r.wall_density;
      size_sum += r.grid_size;
    }
  }

  nlohmann::json to_json() const {
    return {{"events", events},         {"replays", replays},   {"score_sum", score_sum},
            {"trained", trained},       {"density_sum", density_sum}, {"size_sum", size_sum},
            {"last_row_update", last_row_update}};
  }

  static MetricsWindow from_json(const nlohmann::json& j) {
    MetricsWindow w;
    j.at("events").get_to(w.events);
    j.at("replays").get_to(w.replays);
    j.at("score_sum").get_to(w.score_sum);
    j.at("trained").get_to(w.trained);
    j.at("density_sum").get_to(w.density_sum);
    j.at("size_sum").get_to(w.size_sum);
    j.at("last_row_update").get_to(w.last_row_update);
    return w;
  }
};

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string metrics_row(const MetricsWindow& w, const EventRecord& last, long total_events) {
  long buffer_total = 0;
  for (int s : last.buffer_sizes) buffer_total += s;
  const double nan = std::nan("");
  const double n = static_cast<double>(w.events);
  const double t = static_cast<double>(w.trained);
  std::ostringstream out;
  out << last.update << ',' << total_events << ',' << fmt(w.events ? w.replays / n : nan) << ','
      << fmt(w.events ? w.score_sum / n : nan) << ',' << buffer_total << ',' << last.population_size << ','
      << fmt(w.trained ? w.density_sum / t : nan) << ',' << fmt(w.trained ? w.size_sum / t : nan) << '\n';
  return out.str();
}

std::vector<EventRecord> read_events(const fs::path& path) {
  std::vector<EventRecord> events;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) events.push_back(event_from_json(nlohmann::json::parse(line)));
  }
  return events;
}

void write_curriculum_csv(const fs::path& out_dir) {
  const std::vector<EventRecord> events = read_events(out_dir / "events.jsonl");
  bool any_trained = false;
  for (const auto& e : events) any_trained = any_trained || e.trained;
  std::ostringstream out;
  out << "update,wall_density,grid_size,score_q25,score_q50,score_q75\n";
  if (any_trained) {
    const CurriculumStats stats = curriculum_stats(events, kCurriculumWindow);
    for (std::size_t i = 0; i < stats.window_end_update.size(); ++i) {
      out << stats.window_end_update[i] << ',' << fmt(stats.wall_density[i]) << ',' << fmt(stats.grid_size[i])
          << ',' << fmt(stats.score_quantiles[i][0]) << ',' << fmt(stats.score_quantiles[i][1]) << ','
          << fmt(stats.score_quantiles[i][2]) << '\n';
    }
  }
  write_file_atomic(out_dir / "curriculum.csv", out.str());
}

void write_member(const fs::path& out_dir, const FrozenPolicy& member) {
  write_file_atomic(out_dir / "checkpoints" / ("member_" + std::to_string(member.checkpoint_id) + ".json"),
                    checkpoint_json(member).dump() + "\n");
}

void write_student(const fs::path& out_dir, const TrainingDomain& domain) {
  write_file_atomic(out_dir / "checkpoints" / "student.json", nlohmann::json(domain.student_snapshot()).dump() + "\n");
}

}  // namespace

std::unique_ptr<TrainingDomain> make_domain(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.is_matrix()) {
    const std::string fixture = cfg.environment.substr(7);
    std::vector<ZeroSumGame> games;
    if (fixture == "random") {
      games = random_games(cfg.matrix_games, cfg.matrix_rows, cfg.matrix_cols, cfg.matrix_seed);
    } else {
      games = load_games(read_file(fixture));
    }
    return std::make_unique<MatrixDomain>(std::move(games));
  }
  LaserTagDomainConfig d;
  d.generator = cfg.generator;
  d.max_episode_steps = cfg.max_episode_steps;
  d.representation = cfg.policy;
  d.hidden = cfg.hidden;
  d.ppo = cfg.ppo;
  if (!cfg.fixed_level.empty()) d.fixed_level = cfg.fixed_level;
  d.init_seed = seed;
  return std::make_unique<LaserTagDomain>(std::move(d));
}

EngineConfig make_engine_config(const ExperimentConfig& cfg, std::uint64_t seed, bool deterministic) {
  EngineConfig e;
  e.method = cfg.method;
  e.replay = cfg.replay;
  e.maestro = cfg.maestro;
  e.plr_capacity = cfg.plr_capacity;
  e.pfsp_power = cfg.pfsp_power;
  e.pfsp_smoothing = cfg.pfsp_smoothing;
  e.win_window = cfg.win_window;
  e.num_workers = deterministic ? 1 : cfg.num_workers;
  e.budget_updates = cfg.budget_updates;
  e.max_iterations = cfg.max_iterations;
  e.seed = seed;
  return e;
}

RunSummary run_training(const ExperimentConfig& base_cfg, std::uint64_t seed, const fs::path& out_dir,
                        const TrainOptions& options) {
  ExperimentConfig cfg = base_cfg;
  if (options.deterministic) {
    cfg.num_workers = 1;
    cfg.ppo.num_workers = 1;
  }
  cfg.seeds = {seed};
  cfg.output_dir = out_dir.string();

  std::unique_ptr<TrainingDomain> domain = make_domain(cfg, seed);
  CurriculumEngine engine(make_engine_config(cfg, seed, options.deterministic), *domain);

  const fs::path events_path = out_dir / "events.jsonl";
  const fs::path metrics_path = out_dir / "metrics.csv";
  const fs::path state_path = out_dir / "state.json";
  MetricsWindow window;
  long total_events = 0;
  EventRecord last;

  if (options.resume) {
    const nlohmann::json state = nlohmann::json::parse(read_file(state_path));
    if (state.at("version").get<int>() != kStateVersion) throw ConfigError("state.json", "unsupported version");
    if (state.at("config") != to_json(cfg)) {
      throw ConfigError("config", "differs from the configuration of the run being resumed");
    }
    engine.load_state(state.at("engine"));
    truncate_file(events_path, state.at("events_bytes").get<std::uintmax_t>());
    truncate_file(metrics_path, state.at("metrics_bytes").get<std::uintmax_t>());
    window = MetricsWindow::from_json(state.at("metrics_window"));
    total_events = state.at("total_events").get<long>();
    if (state.contains("last_event")) last = event_from_json(state.at("last_event"));
  } else {
    fs::create_directories(out_dir / "checkpoints");
    for (const char* name : {"events.jsonl", "metrics.csv", "curriculum.csv", "state.json", "run_manifest.json"}) {
      fs::remove(out_dir / name);
    }
    for (const auto& f : list_files(out_dir / "checkpoints")) fs::remove(out_dir / "checkpoints" / f);
    write_file_atomic(out_dir / "config.json", to_json(cfg).dump(2) + "\n");
    write_file_atomic(metrics_path, std::string(kMetricsCsvHeader) + "\n");
    write_file_atomic(events_path, "");
    for (const auto& m : engine.population().members) write_member(out_dir, m);
  }

  std::ofstream events(events_path, std::ios::binary | std::ios::app);
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::app);
  if (!events || !metrics) throw IoError("cannot open logs in " + out_dir.string());

  auto save = [&] {
    events.flush();
    metrics.flush();
    if (!events || !metrics) throw IoError("log write failed in " + out_dir.string());
    write_student(out_dir, *domain);
    nlohmann::json state = {{"version", kStateVersion},
                            {"config", to_json(cfg)},
                            {"engine", engine.save_state()},
                            {"events_bytes", fs::file_size(events_path)},
                            {"metrics_bytes", fs::file_size(metrics_path)},
                            {"metrics_window", window.to_json()},
                            {"total_events", total_events},
                            {"completed", engine.finished()}};
    if (total_events > 0) state["last_event"] = to_json(last);
    write_file_atomic(state_path, state.dump() + "\n");
  };

  RunSummary summary{seed, out_dir, 0, 0, false};
  while (!engine.finished()) {
    for (const EventRecord& rec : engine.run_round()) {
      events << to_json(rec).dump() << '\n';
      ++total_events;
      last = rec;
      window.add(rec);
      if (rec.new_member >= 0) write_member(out_dir, engine.population().members.at(rec.new_member));
      if (!rec.updated) continue;
      if (rec.update % cfg.metrics_interval == 0) {
        metrics << metrics_row(window, rec, total_events);
        window = MetricsWindow{};
        window.last_row_update = rec.update;
      }
      if (cfg.save_interval > 0 && rec.update % cfg.save_interval == 0) save();
      if (options.halt_after_updates >= 0 && rec.update >= options.halt_after_updates) {
        summary.updates = engine.updates();
        summary.iterations = engine.iterations();
        return summary;
      }
    }
  }

  if (total_events > 0 && window.events > 0) {
    metrics << metrics_row(window, last, total_events);
    window = MetricsWindow{};
    window.last_row_update = last.update;
  }
  save();
  events.close();
  metrics.close();
  write_curriculum_csv(out_dir);
  write_run_manifest(out_dir);

  summary.updates = engine.updates();
  summary.iterations = engine.iterations();
  summary.completed = true;
  return summary;
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg, const TrainOptions& options) {
  std::vector<RunSummary> runs;
  for (std::uint64_t seed : cfg.seeds) {
    runs.push_back(run_training(cfg, seed, fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed)), options));
  }
  return runs;
}

void write_run_manifest(const fs::path& dir) {
  nlohmann::json files = nlohmann::json::array();
  for (const fs::path& rel : list_files(dir)) {
    if (rel == "run_manifest.json") continue;
    const std::string bytes = read_file(dir / rel);
    files.push_back({{"path", rel.generic_string()}, {"bytes", bytes.size()}, {"fnv1a64", content_hash(bytes)}});
  }
  write_file_atomic(dir / "run_manifest.json", nlohmann::json{{"version", 1}, {"files", files}}.dump(2) + "\n");
}

}  // namespace maestro
