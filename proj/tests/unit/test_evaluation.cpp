#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "maestro/errors.hpp"
#include "maestro/evaluation.hpp"
#include "maestro/matrix_domain.hpp"

using namespace maestro;
using lasertag::Action;
using lasertag::Facing;

namespace {

// 5x5 open room whose starts face each other down the middle column, so the
// first start and the second start are equivalent up to rotation.
lasertag::NamedLevel facing_room() {
  lasertag::LaserTagParams p;
  p.width = 5;
  p.height = 5;
  p.walls.assign(25, 0);
  p.starts = {lasertag::Pose{2, 0, Facing::kSouth}, lasertag::Pose{2, 4, Facing::kNorth}};
  return {"facing", p};
}

PolicyEntry constant_entry(const std::string& method, int seed, Action a) {
  return {method, seed, make_constant_policy(5, lasertag_encoding(), static_cast<int>(a)), true};
}

PolicyEntry random_entry(const std::string& method, int seed) {
  Rng rng(static_cast<std::uint64_t>(seed) * 7919 + method.size());
  PolicyParams p = make_mlp_policy(5, lasertag_encoding(), 8, rng);
  for (auto& w : p.weights) w *= 3.0;
  return {method, seed, p, false};
}

std::vector<lasertag::NamedLevel> two_heldout() {
  return {lasertag::heldout_levels()[0], lasertag::heldout_levels()[1]};
}

EventRecord trained_event(double density, double size, double score, long update) {
  EventRecord e;
  e.trained = true;
  e.wall_density = density;
  e.grid_size = size;
  e.score = score;
  e.update = update;
  return e;
}

}  // namespace

TEST_CASE("round robin schedule size") {
  const std::vector<PolicyEntry> policies{random_entry("x", 0), random_entry("x", 1), random_entry("y", 0),
                                          random_entry("y", 1)};
  RoundRobinConfig cfg;
  cfg.episodes_per_pair = 5;
  const auto schedule = round_robin_schedule(policies, 1, cfg);
  CHECK(schedule.size() == 40);
  // Every (a, b, level) pairing is played in both role orders.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::set<bool>> roles;
  for (const auto& m : schedule) {
    CHECK(policies[m.a].method != policies[m.b].method);
    roles[{std::min(m.a, m.b), std::max(m.a, m.b), m.level}].insert(m.role_swap);
  }
  for (const auto& [k, v] : roles) CHECK(v.size() == 2);
  CHECK(round_robin_schedule(policies, 13, cfg).size() == 40 * 13);
}

TEST_CASE("a shooter tags a noop opponent every episode") {
  const std::vector<PolicyEntry> policies{constant_entry("shooter", 0, Action::kShoot),
                                          constant_entry("idle", 0, Action::kNoop)};
  RoundRobinConfig cfg;
  cfg.episodes_per_pair = 3;
  const Tournament t = run_round_robin(policies, {facing_room()}, cfg);
  CHECK(t.matches.size() == 6);
  CHECK(t.table.mean_return(0, 1) == 1.0);
  CHECK(t.table.mean_return(1, 0) == -1.0);
  for (const auto& m : t.matches) CHECK(m.length == 1);
  CHECK(t.table.method_scores() == std::vector<double>{1.0, -1.0});
}

TEST_CASE("tournament bookkeeping") {
  const std::vector<PolicyEntry> policies{random_entry("x", 0), random_entry("x", 1), random_entry("y", 0),
                                          random_entry("z", 0)};
  RoundRobinConfig cfg;
  cfg.episodes_per_pair = 2;
  cfg.seed = 5;
  cfg.max_episode_steps = 64;
  const Tournament t = run_round_robin(policies, two_heldout(), cfg);
  for (const auto& m : t.matches) {
    CHECK(m.return_a + m.return_b == 0.0);
    const std::string expect = m.return_a > 0 ? "a" : (m.return_a < 0 ? "b" : "draw");
    CHECK(m.winner == expect);
  }
  const auto& r = t.table.mean_return;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      if (i != j) CHECK(r(i, j) == doctest::Approx(-r(j, i)));

  const TournamentTable n = normalize_returns(t.table);
  CHECK(n.normalized);
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      CHECK(n.mean_return(i, j) == doctest::Approx((r(i, j) + 1) / 2));
      if (i != j) CHECK(n.mean_return(i, j) + n.mean_return(j, i) == doctest::Approx(1.0));
    }
  CHECK_THROWS_AS(normalize_returns(n), UsageError);

  // Same manifest, same table; parallel collection reduces in schedule order.
  cfg.num_workers = 3;
  const Tournament again = run_round_robin(policies, two_heldout(), cfg);
  std::ostringstream a, b;
  write_matches_csv(a, t.matches);
  write_matches_csv(b, again.matches);
  CHECK(a.str() == b.str());
  CHECK(tournament_summary(t.table) == tournament_summary(again.table));
  CHECK(a.str().rfind(kMatchCsvHeader, 0) == 0);
}

TEST_CASE("normalization examples") {
  TournamentTable t;
  t.methods = {"a", "b"};
  t.mean_return = Eigen::MatrixXd{{0.0, 1.0}, {-1.0, 0.0}};
  t.episodes = Eigen::MatrixXi::Ones(2, 2);
  const TournamentTable n = normalize_returns(t);
  CHECK(n.mean_return(0, 0) == 0.5);
  CHECK(n.mean_return(0, 1) == 1.0);
  CHECK(n.mean_return(1, 0) == 0.0);
}

TEST_CASE("self pairings average to zero") {
  const std::vector<PolicyEntry> policies{random_entry("x", 0), random_entry("x", 1), random_entry("y", 0)};
  RoundRobinConfig cfg;
  cfg.include_self = true;
  cfg.episodes_per_pair = 3;
  cfg.max_episode_steps = 64;
  const Tournament t = run_round_robin(policies, two_heldout(), cfg);
  CHECK(std::abs(t.table.mean_return(0, 0)) <= 1e-12);
}

TEST_CASE("tournament input checks") {
  RoundRobinConfig cfg;
  CHECK_THROWS_AS(run_round_robin({random_entry("x", 0), random_entry("x", 1)}, two_heldout(), cfg), ParameterError);
  CHECK_THROWS_AS(run_round_robin({random_entry("x", 0), random_entry("y", 1)}, {}, cfg), ParameterError);
  PolicyEntry bad{"y", 0, make_tabular_policy(5, ObservationEncoding{9, 5}), false};
  CHECK_THROWS_AS(run_round_robin({random_entry("x", 0), bad}, two_heldout(), cfg), ConfigError);
  cfg.episodes_per_pair = 0;
  CHECK_THROWS_AS(round_robin_schedule({random_entry("x", 0), random_entry("y", 0)}, 1, cfg), ParameterError);
}

TEST_CASE("specialist schedule and evaluation") {
  SpecialistConfig cfg;
  cfg.levels = {lasertag::heldout_levels()[0].name, lasertag::heldout_levels()[2].name};
  cfg.budget_updates = 2;
  cfg.episodes = 2;
  cfg.domain.max_episode_steps = 32;
  cfg.domain.ppo.rollout_length = 32;
  cfg.domain.ppo.epochs = 1;
  cfg.domain.ppo.minibatches = 1;
  cfg.domain.hidden = 4;
  CHECK(specialist_schedule(cfg) == cfg.levels);
  const auto results = run_specialist_eval({random_entry("g", 0)}, cfg);
  REQUIRE(results.size() == 2);
  for (const auto& r : results) {
    CHECK(r.specialist_updates == 2);
    CHECK(r.episodes == 4);
    CHECK(r.generalist_win_rate >= 0.0);
    CHECK(r.generalist_win_rate <= 1.0);
  }
  // Same config, same specialist.
  CHECK(train_specialist(cfg, cfg.levels[0]).weights == train_specialist(cfg, cfg.levels[0]).weights);

  cfg.budget_updates = 0;
  CHECK_THROWS_AS(specialist_schedule(cfg), ParameterError);
  cfg.budget_updates = 1;
  cfg.method = Method::kMaestro;
  CHECK_THROWS_AS(train_specialist(cfg, cfg.levels[0]), ConfigError);
  cfg.levels = {"NoSuchLevel"};
  CHECK_THROWS(specialist_schedule(cfg));
}

TEST_CASE("a policy against itself scores zero under role swaps") {
  const auto& level = lasertag::heldout_levels()[3].params;
  const PolicyEntry p = random_entry("x", 3);
  double total = 0.0;
  for (int e = 0; e < 20; ++e) {
    const auto o = play_match(level, p.policy, false, p.policy, false, static_cast<std::uint64_t>(e), 64);
    total += o.returns[0] + o.returns[1];
  }
  CHECK(total == 0.0);
}

TEST_CASE("curriculum stats examples") {
  std::vector<EventRecord> constant;
  for (int i = 0; i < 10; ++i) constant.push_back(trained_event(0.2, 7, 0.1, i));
  const auto c = curriculum_stats(constant, 5);
  CHECK(c.wall_density == std::vector<double>{0.2, 0.2});
  CHECK(c.grid_size == std::vector<double>{7, 7});
  CHECK(c.window_end_update == std::vector<long>{4, 9});

  std::vector<EventRecord> alternating;
  for (int i = 0; i < 8; ++i) alternating.push_back(trained_event(i % 2 ? 0.5 : 0.1, 5, i, i));
  // Untrained events are ignored.
  EventRecord skipped = trained_event(0.9, 15, 100, 0);
  skipped.trained = false;
  alternating.insert(alternating.begin() + 2, skipped);
  const auto a = curriculum_stats(alternating, 4);
  REQUIRE(a.wall_density.size() == 2);
  CHECK(a.wall_density[0] == doctest::Approx(0.3));
  CHECK(a.wall_density[1] == doctest::Approx(0.3));
  CHECK(a.score_quantiles[0][1] == doctest::Approx(1.5));

  CHECK_THROWS_AS(curriculum_stats({}, 4), ParameterError);
  CHECK_THROWS_AS(curriculum_stats(constant, 0), ParameterError);
}

TEST_CASE("curriculum stats match levels regenerated from their seeds") {
  LaserTagDomainConfig d;
  d.generator = {5, 8, 0.5};
  d.max_episode_steps = 24;
  d.representation = Representation::kTabular;
  d.ppo.rollout_length = 24;
  d.ppo.epochs = 1;
  d.ppo.minibatches = 1;
  LaserTagDomain domain(d);
  EngineConfig e;
  e.method = Method::kMaestro;
  e.maestro.checkpoint_interval = 4;
  e.maestro.member_capacity = 8;
  e.budget_updates = 1'000'000;
  e.seed = 9;
  CurriculumEngine engine(e, domain);
  std::vector<EventRecord> events;
  while (engine.iterations() < 300) {
    for (auto& r : engine.run_round()) events.push_back(r);
  }
  std::vector<EventRecord> regenerated = events;
  for (auto& r : regenerated) {
    const auto level = lasertag::generate(r.env_seed, d.generator);
    r.wall_density = level.wall_density();
    r.grid_size = level.width;
  }
  const auto x = curriculum_stats(events, 10);
  const auto y = curriculum_stats(regenerated, 10);
  CHECK_FALSE(x.wall_density.empty());
  CHECK(x.wall_density == y.wall_density);
  CHECK(x.grid_size == y.grid_size);
}

TEST_CASE("regret landscape dimensions and the joint argmax") {
  MatrixDomain domain(random_games(5, 3, 3, 2));
  EngineConfig e;
  e.method = Method::kMaestro;
  e.maestro.checkpoint_interval = 20;
  e.maestro.member_capacity = 8;
  e.maestro.estimator = Estimator::kExact;
  e.budget_updates = 100;
  e.seed = 3;
  CurriculumEngine engine(e, domain);

  Population one;
  one.add(freeze(domain.student_snapshot(), 0, 0), 8);
  const RegretMatrix single = regret_landscape(domain, one, 1, Estimator::kExact, 1);
  CHECK(single.regret.rows() == 1);
  CHECK(single.regret.cols() == 1);

  while (!engine.finished()) engine.run_round();
  const auto& pop = engine.population();
  for (Estimator est : {Estimator::kExact, Estimator::kMaxMc, Estimator::kPvl}) {
    const RegretMatrix m = regret_landscape(domain, pop, 16, est, 4);
    CHECK(m.regret.rows() == static_cast<Eigen::Index>(pop.size()));
    CHECK(m.regret.cols() == 16);
    CHECK(m.regret.minCoeff() >= 0.0);
    CHECK(joint_argmax(m).value >= independent_argmax(m).value);
  }
  CHECK_THROWS_AS(regret_landscape(domain, Population{}, 2, Estimator::kExact, 1), ParameterError);
  CHECK_THROWS_AS(regret_landscape(domain, pop, 0, Estimator::kExact, 1), ParameterError);
}
