#include "maestro/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

std::vector<std::string> method_list(const std::vector<PolicyEntry>& policies) {
  std::vector<std::string> methods;
  for (const auto& p : policies) {
    if (std::find(methods.begin(), methods.end(), p.method) == methods.end()) methods.push_back(p.method);
  }
  return methods;
}

std::size_t method_index(const std::vector<std::string>& methods, const std::string& m) {
  return static_cast<std::size_t>(std::find(methods.begin(), methods.end(), m) - methods.begin());
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string format_real(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::vector<double> TournamentTable::method_scores() const {
  std::vector<double> scores;
  const auto n = static_cast<Eigen::Index>(methods.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      total += mean_return(i, j);
      ++count;
    }
    scores.push_back(count ? total / count : 0.0);
  }
  return scores;
}

std::vector<ScheduledMatch> round_robin_schedule(const std::vector<PolicyEntry>& policies, std::size_t num_levels,
                                                 const RoundRobinConfig& cfg) {
  if (cfg.episodes_per_pair < 1) throw ParameterError("episodes_per_pair must be positive");
  const std::vector<std::string> methods = method_list(policies);
  std::vector<ScheduledMatch> schedule;
  for (std::size_t level = 0; level < num_levels; ++level) {
    for (std::size_t a = 0; a < policies.size(); ++a) {
      for (std::size_t b = 0; b < policies.size(); ++b) {
        const bool same_method = policies[a].method == policies[b].method;
        if (same_method) {
          if (!cfg.include_self || b < a) continue;
        } else {
          // Each unordered cross-method pair once; role swaps cover both orders.
          if (method_index(methods, policies[a].method) > method_index(methods, policies[b].method)) {
            continue;
          }
        }
        for (int e = 0; e < cfg.episodes_per_pair; ++e) {
          const std::uint64_t seed = mix_seed(mix_seed(mix_seed(cfg.seed, level), a * 7919 + b), static_cast<std::uint64_t>(e));
          for (bool swap : {false, true}) schedule.push_back(ScheduledMatch{level, a, b, e, swap, seed});
        }
      }
    }
  }
  return schedule;
}

Tournament run_round_robin(const std::vector<PolicyEntry>& policies, const std::vector<lasertag::NamedLevel>& levels,
                           const RoundRobinConfig& cfg) {
  const std::vector<std::string> methods = method_list(policies);
  if (methods.size() < 2) throw ParameterError("run_round_robin: at least two methods are required");
  if (levels.empty()) throw ParameterError("run_round_robin: at least one level is required");
  for (const auto& p : policies) {
    if (!(p.policy.encoding == lasertag_encoding()) || p.policy.num_actions != lasertag::kNumActions) {
      throw ConfigError("policies", "policy for " + p.method + " does not match the LaserTag observation shape");
    }
  }

  Tournament t;
  t.schedule = round_robin_schedule(policies, levels.size(), cfg);
  t.matches.resize(t.schedule.size());
  auto play = [&](std::size_t i) {
    const ScheduledMatch& s = t.schedule[i];
    const PolicyEntry& pa = policies[s.a];
    const PolicyEntry& pb = policies[s.b];
    const auto& level = levels[s.level].params;
    MatchOutcome o = s.role_swap ? play_match(level, pb.policy, pb.greedy, pa.policy, pa.greedy, s.seed, cfg.max_episode_steps)
                                 : play_match(level, pa.policy, pa.greedy, pb.policy, pb.greedy, s.seed, cfg.max_episode_steps);
    const int slot_a = s.role_swap ? 1 : 0;
    MatchResult& r = t.matches[i];
    r.level = levels[s.level].name;
    r.method_a = pa.method;
    r.seed_a = pa.seed;
    r.method_b = pb.method;
    r.seed_b = pb.seed;
    r.episode = s.episode;
    r.role_swap = s.role_swap;
    r.return_a = o.returns[static_cast<std::size_t>(slot_a)];
    r.return_b = o.returns[static_cast<std::size_t>(1 - slot_a)];
    r.winner = o.winner < 0 ? "draw" : (o.winner == slot_a ? "a" : "b");
    r.length = o.length;
  };
  const int workers = std::max(1, cfg.num_workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < t.schedule.size(); ++i) play(i);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < t.schedule.size(); i += static_cast<std::size_t>(workers)) play(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Deterministic reduction in schedule order.
  const auto n = static_cast<Eigen::Index>(methods.size());
  TournamentTable& table = t.table;
  table.methods = methods;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, n);
  table.episodes = Eigen::MatrixXi::Zero(n, n);
  std::map<std::string, Eigen::MatrixXd> level_sums;
  std::map<std::string, Eigen::MatrixXi> level_counts;
  for (const auto& lvl : levels) {
    level_sums[lvl.name] = Eigen::MatrixXd::Zero(n, n);
    level_counts[lvl.name] = Eigen::MatrixXi::Zero(n, n);
  }
  for (const MatchResult& r : t.matches) {
    const auto i = static_cast<Eigen::Index>(method_index(methods, r.method_a));
    const auto j = static_cast<Eigen::Index>(method_index(methods, r.method_b));
    sums(i, j) += r.return_a;
    table.episodes(i, j) += 1;
    level_sums[r.level](i, j) += r.return_a;
    level_counts[r.level](i, j) += 1;
    if (i != j) {
      sums(j, i) += r.return_b;
      table.episodes(j, i) += 1;
      level_sums[r.level](j, i) += r.return_b;
      level_counts[r.level](j, i) += 1;
    } else {
      sums(i, i) += r.return_b;
      table.episodes(i, i) += 1;
      level_sums[r.level](i, i) += r.return_b;
      level_counts[r.level](i, i) += 1;
    }
  }
  auto mean = [](const Eigen::MatrixXd& s, const Eigen::MatrixXi& c) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.cols(); ++j) {
        if (c(i, j) > 0) m(i, j) = s(i, j) / c(i, j);
      }
    }
    return m;
  };
  table.mean_return = mean(sums, table.episodes);
  for (const auto& lvl : levels) table.per_level[lvl.name] = mean(level_sums[lvl.name], level_counts[lvl.name]);
  table.seed_pairing = "all cross-method seed pairs, both role orders, " + std::to_string(cfg.episodes_per_pair) +
                       " episodes per pair and level";
  return t;
}

TournamentTable normalize_returns(const TournamentTable& table) {
  if (table.normalized) throw UsageError("normalize_returns: table is already normalized");
  TournamentTable out = table;
  out.mean_return = (table.mean_return.array() + 1.0) / 2.0;
  for (auto& [name, m] : out.per_level) m = (m.array() + 1.0) / 2.0;
  out.normalized = true;
  return out;
}

void write_matches_csv(std::ostream& out, const std::vector<MatchResult>& matches) {
  out << kMatchCsvHeader << '\n';
  for (const auto& m : matches) {
    out << m.level << ',' << m.method_a << ',' << m.seed_a << ',' << m.method_b << ',' << m.seed_b << ','
        << m.episode << ',' << (m.role_swap ? 1 : 0) << ',' << format_real(m.return_a) << ','
        << format_real(m.return_b) << ',' << m.winner << ',' << m.length << '\n';
  }
}

void write_schedule_manifest(std::ostream& out, const std::vector<ScheduledMatch>& schedule,
                             const std::vector<PolicyEntry>& policies, const std::vector<lasertag::NamedLevel>& levels) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    const nlohmann::json j = {{"index", i},
                              {"level", levels[s.level].name},
                              {"method_a", policies[s.a].method},
                              {"seed_a", policies[s.a].seed},
                              {"method_b", policies[s.b].method},
                              {"seed_b", policies[s.b].seed},
                              {"episode", s.episode},
                              {"role_swap", s.role_swap},
                              {"seed", s.seed}};
    out << j.dump() << '\n';
  }
}

nlohmann::json tournament_summary(const TournamentTable& table) {
  auto rows = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return out;
  };
  nlohmann::json per_level = nlohmann::json::object();
  for (const auto& [name, m] : table.per_level) per_level[name] = rows(m);
  const TournamentTable normalized = table.normalized ? table : normalize_returns(table);
  nlohmann::json j = {{"methods", table.methods},
                      {"mean_return", rows(table.mean_return)},
                      {"method_scores", table.method_scores()},
                      {"per_level", per_level},
                      {"seed_pairing", table.seed_pairing},
                      {"normalized", table.normalized},
                      {"normalization", "(r + 1) / 2"},
                      {"normalized_mean_return", rows(normalized.mean_return)},
                      {"normalized_method_scores", normalized.method_scores()}};
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(table.episodes.rows()));
  for (Eigen::Index i = 0; i < table.episodes.rows(); ++i) {
    for (Eigen::Index k = 0; k < table.episodes.cols(); ++k) counts[static_cast<std::size_t>(i)].push_back(table.episodes(i, k));
  }
  j["episodes"] = counts;
  return j;
}

std::vector<std::string> specialist_schedule(const SpecialistConfig& cfg) {
  if (cfg.budget_updates <= 0) throw ParameterError("run_specialist_eval: training budget must be positive");
  for (const auto& name : cfg.levels) lasertag::heldout_level(name);
  return cfg.levels;
}

PolicyParams train_specialist(const SpecialistConfig& cfg, const std::string& level, long* updates) {
  if (env_curriculum(cfg.method) != EnvCurriculum::kDomainRandomization) {
    throw ConfigError("specialist.method", "specialists train on a fixed level; use a dr_* method");
  }
  LaserTagDomainConfig dcfg = cfg.domain;
  dcfg.fixed_level = level;
  dcfg.init_seed = mix_seed(cfg.seed, fnv1a64(level));
  LaserTagDomain domain(dcfg);
  EngineConfig ecfg = cfg.engine;
  ecfg.method = cfg.method;
  ecfg.budget_updates = cfg.budget_updates;
  ecfg.seed = dcfg.init_seed;
  CurriculumEngine engine(ecfg, domain);
  while (!engine.finished()) engine.run_round();
  if (updates) *updates = engine.updates();
  return domain.student();
}

std::vector<SpecialistResult> run_specialist_eval(const std::vector<PolicyEntry>& generalists,
                                                  const SpecialistConfig& cfg) {
  if (generalists.empty()) throw ParameterError("run_specialist_eval: no generalist policies");
  if (cfg.episodes < 1) throw ParameterError("run_specialist_eval: episodes must be positive");
  std::vector<SpecialistResult> results;
  for (const std::string& name : specialist_schedule(cfg)) {
    SpecialistResult r;
    r.level = name;
    const PolicyParams specialist = train_specialist(cfg, name, &r.specialist_updates);
    const auto& level = lasertag::heldout_level(name);
    double total = 0.0;
    double wins = 0.0;
    int count = 0;
    for (std::size_t g = 0; g < generalists.size(); ++g) {
      for (int e = 0; e < cfg.episodes; ++e) {
        for (bool swap : {false, true}) {
          const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, g), static_cast<std::uint64_t>(e));
          const auto& gen = generalists[g];
          const MatchOutcome o =
              swap ? play_match(level, specialist, false, gen.policy, gen.greedy, seed, cfg.domain.max_episode_steps)
                   : play_match(level, gen.policy, gen.greedy, specialist, false, seed, cfg.domain.max_episode_steps);
          const int slot = swap ? 1 : 0;
          total += o.returns[static_cast<std::size_t>(slot)];
          wins += o.winner < 0 ? 0.5 : (o.winner == slot ? 1.0 : 0.0);
          ++count;
        }
      }
    }
    r.episodes = count;
    r.generalist_mean_return = total / count;
    r.generalist_win_rate = wins / count;
    results.push_back(r);
  }
  return results;
}

CurriculumStats curriculum_stats(const std::vector<EventRecord>& events, int window) {
  if (events.empty()) throw ParameterError("curriculum_stats: empty event log");
  if (window < 1) throw ParameterError("curriculum_stats: window must be positive");
  CurriculumStats stats;
  std::vector<const EventRecord*> chunk;
  auto flush = [&] {
    if (chunk.empty()) return;
    double density = 0.0;
    double size = 0.0;
    std::vector<double> scores;
    for (const EventRecord* e : chunk) {
      density += e->wall_density;
      size += e->grid_size;
      scores.push_back(e->score);
    }
    const auto n = static_cast<double>(chunk.size());
    stats.window_end_update.push_back(chunk.back()->update);
    stats.wall_density.push_back(density / n);
    stats.grid_size.push_back(size / n);
    stats.score_quantiles.push_back({quantile(scores, 0.25), quantile(scores, 0.5), quantile(scores, 0.75)});
    chunk.clear();
  };
  for (const auto& e : events) {
    if (!e.trained) continue;
    chunk.push_back(&e);
    if (static_cast<int>(chunk.size()) == window) flush();
  }
  flush();
  return stats;
}

RegretMatrix regret_landscape(const TrainingDomain& domain, const Population& population, int sample_envs,
                              Estimator estimator, std::uint64_t seed) {
  if (population.size() == 0) throw ParameterError("regret_landscape: empty population");
  if (sample_envs < 1) throw ParameterError("regret_landscape: sample_envs must be positive");
  RegretMatrix m;
  m.regret = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(population.size()), sample_envs);
  std::vector<EnvParams> envs;
  for (int k = 0; k < sample_envs; ++k) {
    envs.push_back(domain.generate(mix_seed(seed, static_cast<std::uint64_t>(k))));
    m.environments.push_back("θ" + std::to_string(k + 1));
  }
  for (std::size_t i = 0; i < population.size(); ++i) {
    const FrozenPolicy& member = population.members[i];
    m.co_players.push_back("π" + std::to_string(member.checkpoint_id));
    for (int k = 0; k < sample_envs; ++k) {
      const Episode ep = domain.play(envs[static_cast<std::size_t>(k)], &member,
                                     mix_seed(mix_seed(seed, 0xabc), i * 1000003 + static_cast<std::size_t>(k)));
      double score = 0.0;
      switch (estimator) {
        case Estimator::kMaxMc: score = score_maxmc(ep.trajectory, ep.trajectory.episode_return).value; break;
        case Estimator::kPvl: score = score_pvl(ep.trajectory, domain.gae()).value; break;
        case Estimator::kExact:
          if (!ep.exact_regret) throw ConfigError("estimator", "domain provides no exact regret");
          score = *ep.exact_regret;
          break;
      }
      m.regret(static_cast<Eigen::Index>(i), k) = std::max(0.0, score);
    }
  }
  return m;
}

}  // namespace maestro
