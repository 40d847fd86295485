#include "maestro/commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "maestro/config.hpp"
#include "maestro/errors.hpp"
#include "maestro/evaluation.hpp"
#include "maestro/experiment.hpp"
#include "maestro/io_util.hpp"
#include "maestro/matrix_lab.hpp"
#include "maestro/svg_plot.hpp"

namespace maestro {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingArtifactError& e) {
    err << "missing artifact: " << e.what() << '\n';
    return kExitMissingArtifact;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

PolicyEntry load_policy_entry(const std::string& method, int seed, const fs::path& path, bool greedy) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  PolicyEntry entry;
  entry.method = method;
  entry.seed = seed;
  if (j.contains("policy")) {
    FrozenPolicy f = frozen_from_json(j);
    entry.policy = *f.params;
    entry.greedy = greedy || f.greedy;
  } else {
    entry.policy = j.get<PolicyParams>();
    entry.greedy = greedy;
  }
  return entry;
}

std::vector<lasertag::NamedLevel> resolve_levels(const std::vector<std::string>& names) {
  std::vector<lasertag::NamedLevel> levels;
  for (const std::string& name : names) {
    if (name == "all") {
      for (const auto& l : lasertag::heldout_levels()) levels.push_back(l);
    } else {
      levels.push_back({name, lasertag::heldout_level(name)});
    }
  }
  return levels;
}

std::string flat_name(const fs::path& rel) {
  std::string s = rel.generic_string();
  for (char& c : s) {
    if (c == '/') c = '_';
  }
  return s;
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig cfg = load_experiment_config(args.config);
    if (args.seed) cfg.seeds = {*args.seed};
    if (args.out) cfg.output_dir = args.out->string();
    TrainOptions options;
    options.deterministic = args.deterministic;
    options.resume = args.resume;
    options.halt_after_updates = args.halt_after_updates;
    for (const RunSummary& run : run_experiment(cfg, options)) {
      out << "seed " << run.seed << ": " << run.updates << " updates, " << run.iterations << " iterations"
          << (run.completed ? "" : " (halted)") << " -> " << run.out_dir.string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    EvalConfig cfg = load_eval_config(args.config);
    if (args.deterministic) cfg.num_workers = 1;
    const fs::path out_dir = args.out ? *args.out : fs::path(cfg.output_dir);

    std::vector<PolicyEntry> policies;
    for (const EvalMethod& m : cfg.methods) {
      for (std::size_t k = 0; k < m.checkpoints.size(); ++k) {
        policies.push_back(load_policy_entry(m.name, static_cast<int>(k), m.checkpoints[k], cfg.greedy));
      }
    }
    const std::vector<lasertag::NamedLevel> levels = resolve_levels(cfg.levels);
    fs::create_directories(out_dir);

    if (cfg.kind == "round_robin") {
      RoundRobinConfig rr;
      rr.episodes_per_pair = cfg.episodes_per_pair;
      rr.seed = cfg.seed;
      rr.max_episode_steps = cfg.max_episode_steps;
      rr.include_self = cfg.include_self;
      rr.num_workers = cfg.num_workers;

      std::ostringstream manifest;
      write_schedule_manifest(manifest, round_robin_schedule(policies, levels.size(), rr), policies, levels);
      write_file_atomic(out_dir / "schedule.jsonl", manifest.str());

      const Tournament t = run_round_robin(policies, levels, rr);
      std::ostringstream csv;
      write_matches_csv(csv, t.matches);
      write_file_atomic(out_dir / "matches.csv", csv.str());
      const TournamentTable normalized = normalize_returns(t.table);
      nlohmann::json summary = {{"raw", tournament_summary(t.table)},
                                {"normalized", tournament_summary(normalized)},
                                {"normalization", "(r + 1) / 2"},
                                {"config", to_json(cfg)}};
      write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");

      const std::vector<double> scores = normalized.method_scores();
      out << "round robin over " << levels.size() << " level(s), " << t.matches.size() << " episodes\n";
      for (std::size_t i = 0; i < normalized.methods.size(); ++i) {
        out << std::left << std::setw(12) << normalized.methods[i] << " normalized return " << std::fixed
            << std::setprecision(4) << scores[i] << '\n';
      }
    } else {
      SpecialistConfig sc;
      for (const auto& l : levels) sc.levels.push_back(l.name);
      sc.budget_updates = cfg.specialist_budget;
      sc.method = cfg.specialist_method;
      sc.domain.max_episode_steps = cfg.max_episode_steps;
      sc.domain.hidden = cfg.specialist_hidden;
      sc.domain.ppo = cfg.specialist_ppo;
      sc.engine.num_workers = cfg.num_workers;
      sc.engine.max_iterations = 1'000'000'000;
      sc.episodes = cfg.specialist_episodes;
      sc.seed = cfg.seed;
      const std::vector<SpecialistResult> results = run_specialist_eval(policies, sc);
      std::ostringstream csv;
      csv << "level,specialist_updates,generalist_mean_return,generalist_win_rate,episodes\n" << std::setprecision(17);
      for (const auto& r : results) {
        csv << r.level << ',' << r.specialist_updates << ',' << r.generalist_mean_return << ','
            << r.generalist_win_rate << ',' << r.episodes << '\n';
        out << r.level << ": generalist mean return " << r.generalist_mean_return << ", win rate "
            << r.generalist_win_rate << '\n';
      }
      write_file_atomic(out_dir / "specialist.csv", csv.str());
      write_file_atomic(out_dir / "summary.json", nlohmann::json{{"config", to_json(cfg)}}.dump(2) + "\n");
    }
    write_run_manifest(out_dir);
    return kExitOk;
  });
}

int cmd_plot(const PlotArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(args.results)) throw MissingArtifactError("no results directory " + args.results.string());
    const fs::path out_dir = args.out ? *args.out : args.results / "plots";
    std::vector<fs::path> csvs;
    for (const fs::path& rel : list_files(args.results)) {
      if (rel.extension() == ".csv" && !(args.results / rel).string().starts_with(out_dir.string())) {
        csvs.push_back(rel);
      }
    }
    if (csvs.empty()) throw MissingArtifactError("no CSV files under " + args.results.string());
    for (const fs::path& rel : csvs) {
      std::ifstream in(args.results / rel);
      CsvTable table;
      try {
        table = read_csv(in);
      } catch (const ParseError& e) {
        throw ParseError(rel.generic_string() + ": " + e.what(), 0, 0);
      }
      std::string svg;
      std::ostringstream joined;
      for (std::size_t i = 0; i < table.header.size(); ++i) joined << (i ? "," : "") << table.header[i];
      if (joined.str() == kMatchCsvHeader) {
        // Per-method mean return over all of its cross-play episodes.
        const int ma = table.column("method_a"), mb = table.column("method_b");
        const int ra = table.column("return_a"), rb = table.column("return_b");
        std::map<std::string, std::pair<double, int>> acc;
        std::vector<std::string> order;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
          for (auto [mc, rc] : {std::pair{ma, ra}, std::pair{mb, rb}}) {
            const std::string& name = table.rows[r][static_cast<std::size_t>(mc)];
            if (!acc.count(name)) order.push_back(name);
            acc[name].first += csv_number(table, r, static_cast<std::size_t>(rc));
            acc[name].second += 1;
          }
        }
        BarChart chart{"Cross-play mean return", "mean return", {}, {}};
        for (const auto& name : order) {
          chart.labels.push_back(name);
          chart.values.push_back(acc[name].first / acc[name].second);
        }
        svg = render_bar_chart(chart);
      } else {
        svg = render_line_chart(line_chart_from_csv(table, rel.generic_string()));
      }
      fs::path target = out_dir / flat_name(rel);
      target.replace_extension(".svg");
      write_file_atomic(target, svg);
      out << target.string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_table1(const Table1Args& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RegretMatrix m = args.fixture ? load_regret_matrix(read_file(*args.fixture)) : table1_matrix();
    const Selection joint = joint_argmax(m);
    const Selection indep = independent_argmax(m);
    auto label = [&](const Selection& s) {
      return "(" + m.co_players.at(static_cast<std::size_t>(s.row)) + ", " +
             m.environments.at(static_cast<std::size_t>(s.col)) + ")";
    };
    out << "joint       " << label(joint) << " regret " << joint.value << '\n';
    out << "independent " << label(indep) << " regret " << indep.value << '\n';
    const bool ok = label(joint) == "(πA, θ1)" && joint.value == 0.6 && label(indep) == "(πC, θ3)" &&
                    indep.value == 0.4;
    out << (ok ? "joint selection beats independent selection" : "selections differ from the reference table") << '\n';
    return ok ? kExitOk : kExitFailure;
  });
}

int cmd_landscape(const LandscapeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = parse_experiment_config(nlohmann::json::parse(read_file(args.run / "config.json")));
    const nlohmann::json state = nlohmann::json::parse(read_file(args.run / "state.json"));
    const std::uint64_t run_seed = cfg.seeds.at(0);
    std::unique_ptr<TrainingDomain> domain = make_domain(cfg, run_seed);
    CurriculumEngine engine(make_engine_config(cfg, run_seed, true), *domain);
    engine.load_state(state.at("engine"));
    if (engine.population().size() == 0) throw MissingArtifactError("the run has no population members");
    Estimator estimator = cfg.maestro.estimator;
    if (args.estimator) {
      try {
        estimator = parse_estimator(*args.estimator);
      } catch (const ParameterError&) {
        throw ConfigError("estimator", "unknown estimator '" + *args.estimator + "'");
      }
    }
    const RegretMatrix m = regret_landscape(*domain, engine.population(), args.envs, estimator, args.seed);
    const Selection joint = joint_argmax(m);
    const Selection indep = independent_argmax(m);

    const fs::path out_dir = args.out ? *args.out : args.run;
    std::ostringstream csv;
    csv << "co_player";
    for (const auto& e : m.environments) csv << ',' << e;
    csv << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.regret.rows(); ++i) {
      csv << m.co_players[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < m.regret.cols(); ++k) csv << ',' << m.regret(i, k);
      csv << '\n';
    }
    write_file_atomic(out_dir / "landscape.csv", csv.str());
    auto sel = [&](const Selection& s) {
      return nlohmann::json{{"co_player", m.co_players[static_cast<std::size_t>(s.row)]},
                            {"environment", m.environments[static_cast<std::size_t>(s.col)]},
                            {"regret", s.value}};
    };
    write_file_atomic(out_dir / "landscape.json",
                      nlohmann::json{{"estimator", estimator_name(estimator)},
                                     {"joint", sel(joint)},
                                     {"independent", sel(indep)}}
                              .dump(2) +
                          "\n");
    out << "landscape " << m.regret.rows() << "x" << m.regret.cols() << " (" << estimator_name(estimator) << ")\n";
    out << "joint       (" << m.co_players[joint.row] << ", " << m.environments[joint.col] << ") " << joint.value << '\n';
    out << "independent (" << m.co_players[indep.row] << ", " << m.environments[indep.col] << ") " << indep.value
        << '\n';
    return kExitOk;
  });
}

}  // namespace maestro
