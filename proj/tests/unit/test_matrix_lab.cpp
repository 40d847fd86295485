#include <cmath>

#include "doctest.h"
#include "maestro/errors.hpp"
#include "maestro/matrix_domain.hpp"
#include "maestro/matrix_lab.hpp"
#include "maestro/rng.hpp"

using namespace maestro;

namespace {

RegretMatrix labelled(const Eigen::MatrixXd& m) {
  RegretMatrix r;
  r.regret = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) r.co_players.push_back("p" + std::to_string(i));
  for (Eigen::Index k = 0; k < m.cols(); ++k) r.environments.push_back("e" + std::to_string(k));
  return r;
}

ZeroSumGame random_game(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform() * 2 - 1;
  return ZeroSumGame{a};
}

MixedStrategy random_strategy(Rng& rng, int n) {
  MixedStrategy s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform() + 1e-3;
  return s / s.sum();
}

// Exhaustive pure best-response oracle for the summed exploitability.
double exploitability_oracle(const Eigen::MatrixXd& a, const MixedStrategy& x, const MixedStrategy& y) {
  double best_row = -1e300, worst_col = 1e300;
  for (int i = 0; i < a.rows(); ++i) best_row = std::max(best_row, (a.row(i) * y)(0));
  for (int j = 0; j < a.cols(); ++j) worst_col = std::min(worst_col, x.dot(a.col(j)));
  return best_row - worst_col;
}

Eigen::MatrixXd matching_pennies() {
  Eigen::MatrixXd a(2, 2);
  a << 1, -1, -1, 1;
  return a;
}

}  // namespace

TEST_CASE("bundled regret table joint and independent selection") {
  const RegretMatrix t = table1_matrix();
  REQUIRE(t.regret.rows() == 3);
  REQUIRE(t.regret.cols() == 4);
  const Selection j = joint_argmax(t);
  CHECK(t.co_players[j.row] == "πA");
  CHECK(t.environments[j.col] == "θ1");
  CHECK(j.value == 0.6);
  const Selection ind = independent_argmax(t);
  CHECK(t.co_players[ind.row] == "πC");
  CHECK(t.environments[ind.col] == "θ3");
  CHECK(ind.value == 0.4);
  // Margins.
  const Eigen::VectorXd rows = t.regret.rowwise().mean();
  CHECK(rows[0] == doctest::Approx(0.325));
  CHECK(rows[1] == doctest::Approx(0.325));
  CHECK(rows[2] == doctest::Approx(0.35));
  const Eigen::VectorXd cols = t.regret.colwise().mean();
  CHECK(cols[0] == doctest::Approx(0.3));
  CHECK(cols[1] == doctest::Approx(1.0 / 3.0));
  CHECK(cols[2] == doctest::Approx(0.4));
  CHECK(cols[3] == doctest::Approx(0.3));
}

TEST_CASE("argmax trivia and tie breaking") {
  Eigen::MatrixXd one(1, 1);
  one << 0.3;
  CHECK(joint_argmax(labelled(one)).row == 0);
  CHECK(independent_argmax(labelled(one)).col == 0);
  const Selection tie = joint_argmax(labelled(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  CHECK(tie.row == 0);
  CHECK(tie.col == 0);
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  diag(0, 0) = 1;
  diag(1, 1) = 1;
  CHECK(joint_argmax(labelled(diag)).value >= independent_argmax(labelled(diag)).value);
  CHECK_THROWS_AS(joint_argmax(labelled(Eigen::MatrixXd(0, 0))), ParameterError);
  CHECK_THROWS_AS(independent_argmax(labelled(Eigen::MatrixXd(0, 0))), ParameterError);
}

TEST_CASE("joint selection dominates independent selection on 10000 random matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const int r = 1 + static_cast<int>(rng.uniform_index(6));
    const int c = 1 + static_cast<int>(rng.uniform_index(6));
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = rng.uniform();
    REQUIRE(joint_argmax(labelled(m)).value >= independent_argmax(labelled(m)).value);
  }
}

TEST_CASE("regret matrix validation") {
  RegretMatrix m = labelled(Eigen::MatrixXd::Constant(2, 2, -0.1));
  CHECK_THROWS_AS(m.validate(), ParameterError);
  RegretMatrix bad = labelled(Eigen::MatrixXd::Zero(2, 2));
  bad.co_players.pop_back();
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("matrix text format") {
  const auto games = load_games("# two games\n1 -1\n-1 1\n\n2 0\n0 1\n");
  REQUIRE(games.size() == 2);
  CHECK(games[1].payoff(0, 0) == 2.0);
  CHECK_THROWS_AS(load_games("1 2\n3\n"), ParseError);
  CHECK_THROWS_AS(load_games("1 x\n"), ParseError);
  const RegretMatrix m = load_regret_matrix("#! rows: a b\n#! cols: u v\n0.1 0.2\n0.3 0.4\n");
  CHECK(m.co_players[1] == "b");
  CHECK(m.environments[0] == "u");
  CHECK(joint_argmax(m).value == 0.4);
}

TEST_CASE("solve_zero_sum examples") {
  const ZeroSumSolution mp = solve_zero_sum(ZeroSumGame{matching_pennies()}, 1e-6, 1'000'000);
  CHECK(std::abs(mp.value) <= 1e-6);
  CHECK(mp.row[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(mp.col[0] == doctest::Approx(0.5).epsilon(1e-5));

  Eigen::MatrixXd dom(2, 2);
  dom << 1, 1, 0, 0;
  const ZeroSumSolution d = solve_zero_sum(ZeroSumGame{dom}, 1e-6, 1'000'000);
  CHECK(d.row[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.value == doctest::Approx(1.0).epsilon(1e-6));

  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const ZeroSumGame g = random_game(rng, 3, 3);
    const ZeroSumSolution s = solve_zero_sum(g, 1e-6, 10'000'000);
    CHECK(exploitability_oracle(g.payoff, s.row, s.col) <= 1e-6);
    CHECK(s.value == doctest::Approx(exact_game_value(g)).epsilon(1e-5));
  }
  CHECK_THROWS_AS(solve_zero_sum(ZeroSumGame{matching_pennies()}, 0.0, 10), ParameterError);
  CHECK_THROWS_AS(solve_zero_sum(random_game(rng, 4, 4), 1e-12, 3), ConvergenceError);
}

TEST_CASE("zero-sum duality") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const ZeroSumGame g = random_game(rng, 3, 4);
    const double tol = 1e-6;
    const double v = solve_zero_sum(g, tol, 10'000'000).value;
    const double vt = solve_zero_sum(ZeroSumGame{-g.payoff.transpose()}, tol, 10'000'000).value;
    CHECK(std::abs(v + vt) <= 2 * tol);
  }
}

TEST_CASE("true_regret examples and properties") {
  const ZeroSumGame mp{matching_pennies()};
  CHECK(true_regret(mp, pure_strategy(2, 0), pure_strategy(2, 1)) == doctest::Approx(2.0));
  CHECK(true_regret(mp, pure_strategy(2, 0), pure_strategy(2, 0)) == 0.0);
  CHECK_THROWS_AS(true_regret(mp, uniform_strategy(3), uniform_strategy(2)), ParameterError);

  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const int r = 1 + static_cast<int>(rng.uniform_index(5));
    const int c = 1 + static_cast<int>(rng.uniform_index(5));
    const ZeroSumGame g = random_game(rng, r, c);
    const MixedStrategy x = random_strategy(rng, r);
    const MixedStrategy y = random_strategy(rng, c);
    const double reg = true_regret(g, x, y);
    CHECK(reg >= 0.0);
    const double shift = rng.uniform() * 10 - 5;
    ZeroSumGame shifted{g.payoff.array() + shift};
    CHECK(true_regret(shifted, x, y) == doctest::Approx(reg).epsilon(1e-9));
    // Zero exactly at pure best responses, by enumeration.
    const Eigen::VectorXd payoffs = g.payoff * y;
    for (int i = 0; i < r; ++i) {
      const bool best = payoffs[i] >= payoffs.maxCoeff();
      CHECK((true_regret(g, pure_strategy(r, i), y) == 0.0) == best);
    }
  }
}

TEST_CASE("verify_corollary1 examples") {
  const ZeroSumGame mp{matching_pennies()};
  Rng rng(37);
  std::vector<ZeroSumGame> games{mp, random_game(rng, 3, 3), random_game(rng, 3, 3)};
  std::vector<MixedStrategy> minimax;
  for (const auto& g : games) minimax.push_back(solve_zero_sum(g, 1e-9, 10'000'000).row);
  CHECK(verify_corollary1(games, uniform_strategy(3), minimax, 1e-6).passed);

  const auto uniform = verify_corollary1({mp}, uniform_strategy(1), {uniform_strategy(2)}, 1e-9);
  CHECK(uniform.passed);

  const auto pure = verify_corollary1({mp}, uniform_strategy(1), {pure_strategy(2, 0)}, 1e-6);
  CHECK(!pure.passed);
  CHECK(pure.exploitability[0] == doctest::Approx(1.0));

  // Games outside the support are not checked.
  MixedStrategy dist(2);
  dist << 1.0, 0.0;
  const auto partial = verify_corollary1({mp, mp}, dist, {uniform_strategy(2), pure_strategy(2, 0)}, 1e-6);
  CHECK(partial.passed);
  CHECK(std::isnan(partial.exploitability[1]));
}

TEST_CASE("exact game value matches the iterative solver") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 1 + static_cast<int>(rng.uniform_index(4));
    const int c = 1 + static_cast<int>(rng.uniform_index(4));
    const ZeroSumGame g = random_game(rng, r, c);
    CHECK(exact_game_value(g) == doctest::Approx(solve_zero_sum(g, 1e-7, 10'000'000).value).epsilon(1e-5));
  }
}

TEST_CASE("strategy helpers") {
  CHECK_NOTHROW(check_strategy(uniform_strategy(4), "u"));
  MixedStrategy bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(check_strategy(bad, "bad"), ParameterError);
  CHECK(pure_strategy(3, 2)[2] == 1.0);
}

TEST_CASE("matrix domain co-players best-respond to the averaged student") {
  MatrixDomain domain({ZeroSumGame{matching_pennies()}});
  const EnvParams env = domain.generate(5);
  CHECK(env.matrix().game_index == 0);
  for (int i = 0; i < 200; ++i) {
    Episode ep = domain.play(env, nullptr, static_cast<std::uint64_t>(i));
    REQUIRE(ep.exact_regret.has_value());
    CHECK(*ep.exact_regret >= 0.0);
    domain.train(std::move(ep), static_cast<std::uint64_t>(i));
  }
  const MixedStrategy avg = domain.average_strategy(0);
  CHECK(avg[0] == doctest::Approx(0.5).epsilon(0.05));
  const auto games = random_games(4, 3, 3, 9);
  CHECK(games.size() == 4);
  for (const auto& g : games) CHECK(g.payoff.cwiseAbs().maxCoeff() <= 1.0);
}
