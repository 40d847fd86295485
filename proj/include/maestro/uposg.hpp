#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace maestro {

// Static description of a two-player underspecified stochastic game. Dynamics,
// rewards and initial states live in each environment's reset/step; the free
// parameters live in EnvParams.
struct UposgSpec {
  int num_players = 2;
  int num_actions = 0;
  std::vector<int> observation_shape;
  double gamma = 0.995;
  int max_episode_steps = 256;

  void validate() const;
};

struct GaeConfig {
  double gamma = 0.995;
  double lambda = 0.95;

  void validate() const;
};

// One agent's symbolic observation (cell codes for LaserTag, the game index for
// matrix environments).
using Observation = std::vector<std::uint8_t>;

// One episode from the student's point of view.
//
// All per-step vectors share the same length T. The final step may be a true
// termination (done) or a time-limit truncation; truncated episodes bootstrap
// from `bootstrap_value`, the critic's estimate for the state after the last
// step.
struct Trajectory {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<std::uint8_t> dones;
  bool truncated = false;
  double bootstrap_value = 0.0;

  // Discounted return of this episode and the realized return offered as a
  // candidate for the MaxMC registry.
  double episode_return = 0.0;
  double max_return_bound = 0.0;

  std::size_t size() const { return rewards.size(); }

  // Appends one step. `log_prob` is the behaviour policy's log-probability of
  // `action`.
  void push(Observation observation, int action, double reward, double value, double log_prob,
            bool done);

  // Sets episode_return and max_return_bound from the stored rewards.
  void finalize(double gamma);

  // Throws ParameterError when a structural invariant is violated.
  void validate(double gamma, int max_episode_steps) const;
};

double discounted_return(std::span<const double> rewards, double gamma);

// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t). Past the last
// step the next value is 0, or bootstrap_value for a truncated episode.
std::vector<double> td_errors(const Trajectory& trajectory, double gamma);

// A_t = sum_{k >= t} (gamma * lambda)^(k - t) * delta_k, one backward pass.
std::vector<double> gae_advantages(const Trajectory& trajectory, const GaeConfig& cfg);

// Advantages plus the stored value predictions.
std::vector<double> value_targets(const Trajectory& trajectory, std::span<const double> advantages);

void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

}  // namespace maestro
