#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "maestro/engine.hpp"
#include "maestro/lasertag.hpp"
#include "maestro/lasertag_domain.hpp"
#include "maestro/matrix_lab.hpp"

namespace maestro {

// One trained policy entering a tournament.
struct PolicyEntry {
  std::string method;
  int seed = 0;
  PolicyParams policy;
  bool greedy = false;
};

struct ScheduledMatch {
  std::size_t level = 0;
  std::size_t a = 0;  // index into the policy list
  std::size_t b = 0;
  int episode = 0;
  bool role_swap = false;  // b plays the first start when true
  std::uint64_t seed = 0;
};

struct MatchResult {
  std::string level;
  std::string method_a;
  int seed_a = 0;
  std::string method_b;
  int seed_b = 0;
  int episode = 0;
  bool role_swap = false;
  double return_a = 0.0;
  double return_b = 0.0;
  std::string winner;  // "a", "b" or "draw"
  int length = 0;
};

struct TournamentTable {
  std::vector<std::string> methods;
  // mean_return(i, j): mean return of method i against method j.
  Eigen::MatrixXd mean_return;
  Eigen::MatrixXi episodes;
  std::map<std::string, Eigen::MatrixXd> per_level;
  std::string seed_pairing;
  bool normalized = false;

  // Mean over opponents j != i (the round-robin score).
  std::vector<double> method_scores() const;
};

struct RoundRobinConfig {
  int episodes_per_pair = 5;
  std::uint64_t seed = 0;
  int max_episode_steps = lasertag::kDefaultMaxEpisodeSteps;
  // Also play each method against itself (same-method seed pairs).
  bool include_self = false;
  int num_workers = 1;
};

struct Tournament {
  std::vector<ScheduledMatch> schedule;
  std::vector<MatchResult> matches;
  TournamentTable table;
};

// Every cross-method seed pair on every level, episodes_per_pair times in each
// role order.
std::vector<ScheduledMatch> round_robin_schedule(const std::vector<PolicyEntry>& policies, std::size_t num_levels,
                                                 const RoundRobinConfig& cfg);

Tournament run_round_robin(const std::vector<PolicyEntry>& policies, const std::vector<lasertag::NamedLevel>& levels,
                           const RoundRobinConfig& cfg);

// (r + 1) / 2 on every entry. Throws UsageError on a normalized table.
TournamentTable normalize_returns(const TournamentTable& table);

inline constexpr const char* kMatchCsvHeader =
    "level,method_a,seed_a,method_b,seed_b,episode,role_swap,return_a,return_b,winner,length";
void write_matches_csv(std::ostream& out, const std::vector<MatchResult>& matches);
void write_schedule_manifest(std::ostream& out, const std::vector<ScheduledMatch>& schedule,
                             const std::vector<PolicyEntry>& policies, const std::vector<lasertag::NamedLevel>& levels);
nlohmann::json tournament_summary(const TournamentTable& table);

struct SpecialistConfig {
  std::vector<std::string> levels;
  long budget_updates = 100;
  Method method = Method::kDrSp;
  LaserTagDomainConfig domain;
  EngineConfig engine;
  int episodes = 10;
  std::uint64_t seed = 0;
};

struct SpecialistResult {
  std::string level;
  long specialist_updates = 0;
  double generalist_mean_return = 0.0;
  double generalist_win_rate = 0.0;  // draws count 0.5
  int episodes = 0;
};

// The specialist runs a schedule produces, one per level.
std::vector<std::string> specialist_schedule(const SpecialistConfig& cfg);
PolicyParams train_specialist(const SpecialistConfig& cfg, const std::string& level, long* updates = nullptr);
std::vector<SpecialistResult> run_specialist_eval(const std::vector<PolicyEntry>& generalists,
                                                  const SpecialistConfig& cfg);

struct CurriculumStats {
  std::vector<long> window_end_update;
  std::vector<double> wall_density;
  std::vector<double> grid_size;
  std::vector<std::array<double, 3>> score_quantiles;  // 25th, 50th, 75th
};

// Windows of `window` consecutive trained-on events.
CurriculumStats curriculum_stats(const std::vector<EventRecord>& events, int window);

// Scores the domain's student against every population member on
// `sample_envs` freshly generated environments. Entries are clamped at 0.
RegretMatrix regret_landscape(const TrainingDomain& domain, const Population& population, int sample_envs,
                              Estimator estimator, std::uint64_t seed);

}  // namespace maestro
