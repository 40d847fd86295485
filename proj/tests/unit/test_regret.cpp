#include <cmath>

#include "doctest.h"
#include "maestro/errors.hpp"
#include "maestro/lasertag_domain.hpp"
#include "maestro/regret.hpp"
#include "maestro/rng.hpp"
#include "maestro/tabular.hpp"

using namespace maestro;
using lasertag::Action;
using lasertag::Facing;

namespace {

Trajectory with_values(const std::vector<double>& values) {
  Trajectory t;
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.push(Observation(25, 0), 0, 0.0, values[i], 0.0, i + 1 == values.size());
  }
  t.finalize(0.99);
  return t;
}

// Rewards chosen so that the TD errors equal `deltas` under a zero critic.
Trajectory with_deltas(const std::vector<double>& deltas) {
  Trajectory t;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    t.push(Observation(25, 0), 0, deltas[i], 0.0, 0.0, i + 1 == deltas.size());
  }
  t.finalize(0.99);
  return t;
}

lasertag::LaserTagParams room(int n, lasertag::Pose a, lasertag::Pose b) {
  lasertag::LaserTagParams p;
  p.width = n;
  p.height = n;
  p.walls.assign(static_cast<std::size_t>(n * n), 0);
  p.starts = {a, b};
  return p;
}

FrozenPolicy noop_opponent() {
  FrozenPolicy f = freeze(make_constant_policy(5, lasertag_encoding(), static_cast<int>(Action::kNoop)), 0, 0);
  f.greedy = true;
  return f;
}

Facing mirror(Facing f) {
  if (f == Facing::kEast) return Facing::kWest;
  if (f == Facing::kWest) return Facing::kEast;
  return f;
}

lasertag::LaserTagParams mirror(const lasertag::LaserTagParams& p) {
  lasertag::LaserTagParams m = p;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x)
      m.walls[static_cast<std::size_t>(y * p.width + (p.width - 1 - x))] = p.walls[static_cast<std::size_t>(y * p.width + x)];
  for (auto& s : m.starts) {
    s.x = p.width - 1 - s.x;
    s.facing = mirror(s.facing);
  }
  return m;
}

Observation mirror(const Observation& o) {
  Observation m(o.size());
  const int k = lasertag::kViewSize;
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) m[static_cast<std::size_t>(r * k + (k - 1 - c))] = o[static_cast<std::size_t>(r * k + c)];
  return m;
}

}  // namespace

TEST_CASE("maxmc examples") {
  CHECK(score_maxmc(with_values({0.2, 0.2, 0.2, 0.2, 0.2}), 1.0).value == doctest::Approx(0.8));
  CHECK(score_maxmc(with_values({0.3, 0.3}), 0.3).value == 0.0);
  CHECK(score_maxmc(with_values({0.0, 1.0}), 1.0).value == doctest::Approx(0.5));
  CHECK(score_maxmc(with_values({0.9}), 0.1).value == doctest::Approx(-0.8));
  CHECK(score_maxmc(with_values({0.0}), 1.0).estimator == Estimator::kMaxMc);
  CHECK_THROWS_AS(score_maxmc(Trajectory{}, 1.0), ParameterError);
}

TEST_CASE("maxmc shifts exactly with r_max") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng.uniform_index(20));
    for (auto& x : v) x = rng.uniform() * 2 - 1;
    const Trajectory t = with_values(v);
    const double r = rng.uniform();
    const double c = rng.uniform() * 3;
    CHECK(score_maxmc(t, r + c).value - score_maxmc(t, r).value == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("pvl examples") {
  GaeConfig cfg{0.99, 0.95};
  CHECK(score_pvl(with_deltas({0.0, 0.0, 0.0}), cfg).value == 0.0);
  CHECK(score_pvl(with_deltas({0.5}), cfg).value == doctest::Approx(0.5));
  // gamma * lambda = 0 leaves each advantage equal to its TD error.
  CHECK(score_pvl(with_deltas({-0.3, 0.4}), GaeConfig{0.99, 0.0}).value == doctest::Approx(0.2));
  CHECK_THROWS_AS(score_pvl(Trajectory{}, cfg), ParameterError);
}

TEST_CASE("pvl is non-negative and zero iff no advantage is positive") {
  Rng rng(2);
  const GaeConfig cfg{0.95, 0.9};
  for (int i = 0; i < 500; ++i) {
    Trajectory t;
    const std::size_t n = 1 + rng.uniform_index(15);
    for (std::size_t k = 0; k < n; ++k) {
      t.push(Observation(25, 0), 0, rng.uniform() - 0.7, rng.uniform() - 0.5, 0.0, k + 1 == n);
    }
    t.finalize(cfg.gamma);
    const double s = score_pvl(t, cfg).value;
    const auto adv = gae_advantages(t, cfg);
    const bool any_positive = std::any_of(adv.begin(), adv.end(), [](double a) { return a > 0; });
    CHECK(s >= 0.0);
    CHECK((s == 0.0) == !any_positive);
  }
}

TEST_CASE("max return registry") {
  MaxReturnRegistry r;
  const MaxReturnRegistry::Key k{42, 3};
  update_max_return(r, k, 0.4);
  CHECK(r.get(k, -1) == 0.4);
  r.update(k, 0.9);
  r.update(k, 0.4);
  CHECK(r.get(k, -1) == 0.9);
  CHECK(r.get({42, 4}, -7.0) == -7.0);
  CHECK_FALSE(r.contains({42, -1}));

  Rng rng(3);
  MaxReturnRegistry fuzz;
  std::map<MaxReturnRegistry::Key, double> oracle;
  for (int i = 0; i < 20000; ++i) {
    const MaxReturnRegistry::Key key{rng.uniform_index(10), static_cast<int>(rng.uniform_index(4)) - 1};
    const double v = rng.uniform() * 2 - 1;
    fuzz.update(key, v);
    auto [it, fresh] = oracle.emplace(key, v);
    if (!fresh) it->second = std::max(it->second, v);
  }
  CHECK(fuzz.size() == oracle.size());
  for (const auto& [key, v] : oracle) CHECK(fuzz.get(key, 0) == v);

  const MaxReturnRegistry back = nlohmann::json(fuzz).get<MaxReturnRegistry>();
  for (const auto& [key, v] : oracle) CHECK(back.get(key, 0) == v);
}

TEST_CASE("estimator names") {
  for (Estimator e : {Estimator::kMaxMc, Estimator::kPvl, Estimator::kExact}) CHECK(parse_estimator(estimator_name(e)) == e);
  CHECK_THROWS_AS(parse_estimator("gae"), ParameterError);
}

TEST_CASE("exact regret of the best response is zero") {
  const auto level = room(5, {0, 4, Facing::kNorth}, {3, 1, Facing::kSouth});
  const FrozenPolicy opp = noop_opponent();
  const double gamma = 0.95;
  const LaserTagMdp indexed = build_lasertag_mdp_indexed(level, opp);
  const BestResponse br = best_response_tabular(indexed.mdp, gamma, 1e-10);

  // Tabulate the best response along its own greedy path.
  PolicyParams student = make_tabular_policy(5, lasertag_encoding());
  lasertag::LaserTagState s = lasertag::reset(level, 64);
  while (!s.done()) {
    const int id = indexed.find(s.poses);
    const Observation o = lasertag::observe(s, 0);
    const int a = br.actions[static_cast<std::size_t>(id)];
    const int row = student.find_row(o);
    if (row > 0) {
      REQUIRE(std::distance(student.weights.begin() + row * student.row_width(),
                            std::max_element(student.weights.begin() + row * student.row_width(),
                                             student.weights.begin() + row * student.row_width() + 5)) == a);
    } else {
      const int r = student.ensure_row(o);
      student.weights[static_cast<std::size_t>(r * student.row_width() + a)] = 1.0;
    }
    s = lasertag::step(s, {static_cast<Action>(a), Action::kNoop}).state;
  }
  const ExactRegret e = score_exact(level, opp, student, gamma, 1e-10, true);
  CHECK(std::abs(e.score.value) <= 1e-8);
  CHECK(e.residual <= 1e-10);
  CHECK(e.score.estimator == Estimator::kExact);
}

TEST_CASE("uniform student has positive exact regret") {
  const auto level = room(5, {0, 4, Facing::kNorth}, {3, 1, Facing::kSouth});
  const ExactRegret e =
      score_exact(level, noop_opponent(), make_tabular_policy(5, lasertag_encoding()), 0.95, 1e-10, false);
  CHECK(e.score.value > 0.01);
  CHECK(e.optimal_value > e.student_value);
}

TEST_CASE("exact regret is invariant under mirroring the level") {
  Rng rng(9);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto level = lasertag::generate(seed, {5, 6, 0.3});
    const auto mirrored = mirror(level);
    const FrozenPolicy opp = noop_opponent();
    const TabularMdp mdp = build_lasertag_mdp(level, opp);

    PolicyParams student = make_tabular_policy(5, lasertag_encoding());
    for (const auto& o : mdp.observations) student.ensure_row(o);
    for (auto& w : student.weights) w = rng.uniform() * 2 - 1;
    // The mirrored student sees mirrored views and swaps left with right.
    PolicyParams twin = make_tabular_policy(5, lasertag_encoding());
    for (const auto& o : mdp.observations) {
      const int src = student.find_row(o);
      const int dst = twin.ensure_row(mirror(o));
      for (int c = 0; c < student.row_width(); ++c) {
        int from = c;
        if (c == static_cast<int>(Action::kLeft)) from = static_cast<int>(Action::kRight);
        if (c == static_cast<int>(Action::kRight)) from = static_cast<int>(Action::kLeft);
        twin.weights[static_cast<std::size_t>(dst * twin.row_width() + c)] =
            student.weights[static_cast<std::size_t>(src * student.row_width() + from)];
      }
    }
    const ExactRegret a = score_exact(level, opp, student, 0.9, 1e-11);
    const ExactRegret b = score_exact(mirrored, opp, twin, 0.9, 1e-11);
    CHECK(a.score.value == doctest::Approx(b.score.value).epsilon(1e-8));
    CHECK(a.optimal_value == doctest::Approx(b.optimal_value).epsilon(1e-8));
  }
}
