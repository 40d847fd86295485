#pragma once

#include <array>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include "maestro/lasertag.hpp"
#include "maestro/policy.hpp"

namespace maestro {

// Finite MDP with explicit outcome lists. `next == -1` marks termination.
struct Outcome {
  double prob = 0.0;
  int next = -1;
  double reward = 0.0;
};

struct TabularMdp {
  int num_actions = 0;
  // transitions[s][a] lists the outcomes of action a in state s.
  std::vector<std::vector<std::vector<Outcome>>> transitions;
  int initial_state = 0;
  // The acting agent's observation in each state (empty for synthetic MDPs).
  std::vector<Observation> observations;

  int num_states() const { return static_cast<int>(transitions.size()); }
  void validate() const;
};

// The single-agent MDP faced by `student_index` on a LaserTag level when the
// other agent follows `opponent`. States are the joint poses reachable from
// the level's starts; the step limit is not part of the state, so values are
// infinite-horizon discounted.
TabularMdp build_lasertag_mdp(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent,
                              std::size_t max_states = 2'000'000, int student_index = 0);

// The same MDP together with the joint pose of every state.
struct LaserTagMdp {
  TabularMdp mdp;
  std::vector<std::array<lasertag::Pose, 2>> poses;
  std::unordered_map<int, int> index;
  int find(const std::array<lasertag::Pose, 2>& poses) const;
};
LaserTagMdp build_lasertag_mdp_indexed(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent,
                                       std::size_t max_states = 2'000'000, int student_index = 0);

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> greedy;  // lowest-index maximizing action per state
  double residual = 0.0;    // max |T V - V| of the returned values
  long sweeps = 0;
};

double bellman_q(const TabularMdp& mdp, const std::vector<double>& values, int s, int a, double gamma);

// Gauss-Seidel value iteration, certified by one final Jacobi backup.
ValueIterationResult value_iteration(const TabularMdp& mdp, double gamma, double tolerance, long max_sweeps = 1'000'000);

// Values of a stochastic state policy, policy[s][a].
struct PolicyEvaluation {
  std::vector<double> values;
  double residual = 0.0;
};
PolicyEvaluation evaluate_policy(const TabularMdp& mdp, const std::vector<std::vector<double>>& policy, double gamma,
                                 double tolerance, long max_sweeps = 1'000'000);

// Per-state distribution of a policy acting on the MDP's observations.
std::vector<std::vector<double>> state_policy(const TabularMdp& mdp, const PolicyParams& policy, bool greedy);

struct BestResponse {
  std::vector<int> actions;  // greedy action per joint state
  double value = 0.0;        // V*(s0)
  double residual = 0.0;
  std::vector<double> state_values;
};

BestResponse best_response_tabular(const TabularMdp& mdp, double gamma, double tolerance);
BestResponse best_response_tabular(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent, double gamma,
                                   double tolerance, std::size_t max_states = 2'000'000);

}  // namespace maestro
