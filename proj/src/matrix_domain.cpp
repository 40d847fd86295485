#include "maestro/matrix_domain.hpp"

#include <cmath>

#include "maestro/errors.hpp"

namespace maestro {

std::vector<ZeroSumGame> random_games(int count, int rows, int cols, std::uint64_t seed) {
  if (count < 1 || rows < 1 || cols < 1) throw ParameterError("random_games: counts must be positive");
  Rng rng(seed);
  std::vector<ZeroSumGame> games;
  for (int g = 0; g < count; ++g) {
    Eigen::MatrixXd a(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) a(r, c) = 2.0 * rng.uniform() - 1.0;
    }
    games.push_back(ZeroSumGame{a});
  }
  return games;
}

MatrixDomain::MatrixDomain(std::vector<ZeroSumGame> games) : games_(std::move(games)) {
  if (games_.empty()) throw ParameterError("MatrixDomain: empty game suite");
  if (games_.size() > 255) throw ParameterError("MatrixDomain: at most 255 games");
  for (const auto& g : games_) {
    g.validate();
    regrets_.push_back(Eigen::VectorXd::Zero(g.rows()));
    strategy_sums_.push_back(Eigen::VectorXd::Zero(g.rows()));
    counts_.push_back(0);
  }
}

EnvParams MatrixDomain::generate(std::uint64_t seed) const {
  Rng rng(seed);
  return EnvParams{seed, MatrixLevel{static_cast<int>(rng.uniform_index(games_.size()))}};
}

MixedStrategy MatrixDomain::current_strategy(int game) const {
  const Eigen::VectorXd& r = regrets_.at(static_cast<std::size_t>(game));
  const double total = r.sum();
  if (total <= 0.0) return uniform_strategy(static_cast<int>(r.size()));
  return r / total;
}

MixedStrategy MatrixDomain::average_strategy(int game) const {
  const Eigen::VectorXd& s = strategy_sums_.at(static_cast<std::size_t>(game));
  const double total = s.sum();
  if (total <= 0.0) return uniform_strategy(static_cast<int>(s.size()));
  return s / total;
}

int MatrixDomain::best_response_column(int game) const {
  const Eigen::VectorXd payoffs =
      (average_strategy(game).transpose() * games_.at(static_cast<std::size_t>(game)).payoff).transpose();
  Eigen::Index col = 0;
  payoffs.minCoeff(&col);
  return static_cast<int>(col);
}

Episode MatrixDomain::play(const EnvParams& env, const FrozenPolicy*, std::uint64_t seed) const {
  const int g = env.matrix().game_index;
  if (g < 0 || g >= static_cast<int>(games_.size())) throw ParameterError("MatrixDomain: game index out of range");
  const Eigen::MatrixXd& a = games_[static_cast<std::size_t>(g)].payoff;
  Rng rng(seed);
  const MixedStrategy x = current_strategy(g);
  const int col = best_response_column(g);
  const int action = static_cast<int>(rng.categorical(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))));
  const Eigen::VectorXd column = a.col(col);

  Episode ep;
  ep.coplayer_action = col;
  const double reward = column[action];
  ep.trajectory.push(Observation{static_cast<std::uint8_t>(g)}, action, reward, x.dot(column),
                     std::log(x[action]), true);
  ep.trajectory.finalize(1.0);
  ep.undiscounted_return = reward;
  ep.outcome = reward > 0.0 ? 1.0 : (reward < 0.0 ? 0.0 : 0.5);
  ep.exact_regret = true_regret(games_[static_cast<std::size_t>(g)], average_strategy(g), pure_strategy(a.cols(), col));
  return ep;
}

bool MatrixDomain::train(Episode episode, std::uint64_t) {
  const int g = episode.trajectory.observations.at(0).at(0);
  const auto gi = static_cast<std::size_t>(g);
  const Eigen::VectorXd u = games_[gi].payoff.col(episode.coplayer_action);
  const MixedStrategy x = current_strategy(g);
  counts_[gi] += 1;
  strategy_sums_[gi] += static_cast<double>(counts_[gi]) * x;
  regrets_[gi] = (regrets_[gi].array() + u.array() - x.dot(u)).max(0.0);
  return true;
}

PolicyParams MatrixDomain::student_snapshot() const {
  int actions = 0;
  for (const auto& g : games_) actions = std::max(actions, g.rows());
  PolicyParams p = make_tabular_policy(actions, {1, static_cast<int>(games_.size())});
  for (std::size_t g = 0; g < games_.size(); ++g) {
    const int row = p.ensure_row(Observation{static_cast<std::uint8_t>(g)});
    const MixedStrategy avg = average_strategy(static_cast<int>(g));
    for (int a = 0; a < actions; ++a) {
      const double prob = a < avg.size() ? avg[a] : 0.0;
      p.weights[static_cast<std::size_t>(row * p.row_width() + a)] = std::log(prob + 1e-12);
    }
  }
  return p;
}

nlohmann::json MatrixDomain::save() const {
  nlohmann::json regrets = nlohmann::json::array();
  nlohmann::json sums = nlohmann::json::array();
  for (std::size_t g = 0; g < games_.size(); ++g) {
    regrets.push_back(std::vector<double>(regrets_[g].data(), regrets_[g].data() + regrets_[g].size()));
    sums.push_back(std::vector<double>(strategy_sums_[g].data(), strategy_sums_[g].data() + strategy_sums_[g].size()));
  }
  return {{"regrets", regrets}, {"strategy_sums", sums}, {"counts", counts_}};
}

void MatrixDomain::load(const nlohmann::json& j) {
  const auto regrets = j.at("regrets").get<std::vector<std::vector<double>>>();
  const auto sums = j.at("strategy_sums").get<std::vector<std::vector<double>>>();
  counts_ = j.at("counts").get<std::vector<long>>();
  if (regrets.size() != games_.size() || sums.size() != games_.size() || counts_.size() != games_.size()) {
    throw ParameterError("MatrixDomain::load: game count mismatch");
  }
  for (std::size_t g = 0; g < games_.size(); ++g) {
    regrets_[g] = Eigen::Map<const Eigen::VectorXd>(regrets[g].data(), static_cast<Eigen::Index>(regrets[g].size()));
    strategy_sums_[g] = Eigen::Map<const Eigen::VectorXd>(sums[g].data(), static_cast<Eigen::Index>(sums[g].size()));
  }
}

}  // namespace maestro
