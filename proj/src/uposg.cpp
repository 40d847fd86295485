#include "maestro/uposg.hpp"

#include <cmath>
#include <string>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

constexpr int kTrajectoryVersion = 1;

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("gamma must lie in (0, 1], got " + std::to_string(gamma));
  }
}

}  // namespace

void UposgSpec::validate() const {
  if (num_players != 2) throw ParameterError("UposgSpec: num_players must be 2");
  if (num_actions < 1) throw ParameterError("UposgSpec: num_actions must be positive");
  check_gamma(gamma);
  if (max_episode_steps < 1) throw ParameterError("UposgSpec: max_episode_steps must be >= 1");
}

void GaeConfig::validate() const {
  check_gamma(gamma);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("GaeConfig: lambda must lie in [0, 1]");
}

void Trajectory::push(Observation observation, int action, double reward, double value,
                      double log_prob, bool done) {
  observations.push_back(std::move(observation));
  actions.push_back(action);
  rewards.push_back(reward);
  values.push_back(value);
  log_probs.push_back(log_prob);
  dones.push_back(done ? 1 : 0);
}

void Trajectory::finalize(double gamma) {
  episode_return = discounted_return(rewards, gamma);
  max_return_bound = episode_return;
}

void Trajectory::validate(double gamma, int max_episode_steps) const {
  const std::size_t t = rewards.size();
  if (observations.size() != t || actions.size() != t || values.size() != t ||
      log_probs.size() != t || dones.size() != t) {
    throw ParameterError("Trajectory: per-step lists differ in length");
  }
  if (max_episode_steps > 0 && t > static_cast<std::size_t>(max_episode_steps)) {
    throw ParameterError("Trajectory: longer than max_episode_steps");
  }
  for (std::size_t i = 0; i + 1 < t; ++i) {
    if (dones[i]) throw ParameterError("Trajectory: done flag before the final step");
  }
  if (t > 0 && dones.back() && truncated) {
    throw ParameterError("Trajectory: final step cannot be both done and truncated");
  }
  if (std::abs(discounted_return(rewards, gamma) - episode_return) > 1e-9) {
    throw ParameterError("Trajectory: episode_return disagrees with rewards");
  }
}

double discounted_return(std::span<const double> rewards, double gamma) {
  check_gamma(gamma);
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

std::vector<double> td_errors(const Trajectory& trajectory, double gamma) {
  check_gamma(gamma);
  const std::size_t t_len = trajectory.size();
  std::vector<double> deltas(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    double next_value = 0.0;
    if (t + 1 < t_len) {
      next_value = trajectory.values[t + 1];
    } else if (trajectory.truncated) {
      next_value = trajectory.bootstrap_value;
    }
    const double not_done = trajectory.dones[t] ? 0.0 : 1.0;
    deltas[t] = trajectory.rewards[t] + gamma * next_value * not_done - trajectory.values[t];
  }
  return deltas;
}

std::vector<double> gae_advantages(const Trajectory& trajectory, const GaeConfig& cfg) {
  cfg.validate();
  const std::vector<double> deltas = td_errors(trajectory, cfg.gamma);
  std::vector<double> advantages(deltas.size());
  const double decay = cfg.gamma * cfg.lambda;
  double running = 0.0;
  for (std::size_t i = deltas.size(); i-- > 0;) {
    // Episodes never span a done flag, so no reset is needed mid-trajectory.
    running = deltas[i] + decay * running;
    advantages[i] = running;
  }
  return advantages;
}

std::vector<double> value_targets(const Trajectory& trajectory, std::span<const double> advantages) {
  if (advantages.size() != trajectory.size()) throw ParameterError("value_targets: length mismatch");
  std::vector<double> targets(advantages.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = advantages[i] + trajectory.values[i];
  return targets;
}

void to_json(nlohmann::json& j, const Trajectory& t) {
  j = nlohmann::json{{"version", kTrajectoryVersion},
                     {"observations", t.observations},
                     {"actions", t.actions},
                     {"rewards", t.rewards},
                     {"values", t.values},
                     {"log_probs", t.log_probs},
                     {"dones", t.dones},
                     {"truncated", t.truncated},
                     {"bootstrap_value", t.bootstrap_value},
                     {"episode_return", t.episode_return},
                     {"max_return_bound", t.max_return_bound}};
}

void from_json(const nlohmann::json& j, Trajectory& t) {
  if (j.at("version").get<int>() != kTrajectoryVersion) {
    throw ParameterError("Trajectory: unsupported serialization version");
  }
  j.at("observations").get_to(t.observations);
  j.at("actions").get_to(t.actions);
  j.at("rewards").get_to(t.rewards);
  j.at("values").get_to(t.values);
  j.at("log_probs").get_to(t.log_probs);
  j.at("dones").get_to(t.dones);
  j.at("truncated").get_to(t.truncated);
  j.at("bootstrap_value").get_to(t.bootstrap_value);
  j.at("episode_return").get_to(t.episode_return);
  j.at("max_return_bound").get_to(t.max_return_bound);
}

}  // namespace maestro
