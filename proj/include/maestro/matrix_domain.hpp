#pragma once

#include <vector>

#include "maestro/engine.hpp"
#include "maestro/matrix_lab.hpp"

namespace maestro {

// Fully observable matrix testbed. θ picks one zero-sum game of a suite; the
// student is the row player, learning per game with regret matching+ and
// reporting its linearly averaged strategy. Every co-player is omniscient: it
// plays the exact best-response column to the student's averaged strategy in
// the sampled game, so scores can use the exact regret.
class MatrixDomain : public TrainingDomain {
 public:
  explicit MatrixDomain(std::vector<ZeroSumGame> games);

  EnvParams generate(std::uint64_t seed) const override;
  Episode play(const EnvParams& env, const FrozenPolicy* coplayer, std::uint64_t seed) const override;
  bool train(Episode episode, std::uint64_t update_seed) override;
  PolicyParams student_snapshot() const override;
  GaeConfig gae() const override { return GaeConfig{1.0, 1.0}; }
  nlohmann::json save() const override;
  void load(const nlohmann::json& j) override;

  const std::vector<ZeroSumGame>& games() const { return games_; }
  MixedStrategy current_strategy(int game) const;
  MixedStrategy average_strategy(int game) const;
  // Lowest-index column minimizing the averaged strategy's payoff.
  int best_response_column(int game) const;
  long updates_on(int game) const { return counts_.at(static_cast<std::size_t>(game)); }

 private:
  std::vector<ZeroSumGame> games_;
  std::vector<Eigen::VectorXd> regrets_;
  std::vector<Eigen::VectorXd> strategy_sums_;
  std::vector<long> counts_;
};

// Random games with entries uniform on [-1, 1].
std::vector<ZeroSumGame> random_games(int count, int rows, int cols, std::uint64_t seed);

}  // namespace maestro
