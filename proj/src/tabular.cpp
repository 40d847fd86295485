#include "maestro/tabular.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

int pose_code(const lasertag::Pose& p) { return (p.y * lasertag::kMaxGridSize + p.x) * 4 + static_cast<int>(p.facing); }

int joint_code(const std::array<lasertag::Pose, 2>& poses) {
  constexpr int kPoseCodes = lasertag::kMaxGridSize * lasertag::kMaxGridSize * 4;
  return pose_code(poses[0]) * kPoseCodes + pose_code(poses[1]);
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
}

double jacobi_residual(const TabularMdp& mdp, const std::vector<double>& values, double gamma,
                       const std::vector<std::vector<double>>* policy) {
  double residual = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    double backup;
    if (policy) {
      backup = 0.0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double p = (*policy)[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        if (p > 0.0) backup += p * bellman_q(mdp, values, s, a, gamma);
      }
    } else {
      backup = -INFINITY;
      for (int a = 0; a < mdp.num_actions; ++a) backup = std::max(backup, bellman_q(mdp, values, s, a, gamma));
    }
    residual = std::max(residual, std::abs(backup - values[static_cast<std::size_t>(s)]));
  }
  return residual;
}

}  // namespace

void TabularMdp::validate() const {
  if (num_actions < 1) throw ParameterError("TabularMdp: num_actions must be positive");
  if (transitions.empty()) throw ParameterError("TabularMdp: no states");
  if (initial_state < 0 || initial_state >= num_states()) throw ParameterError("TabularMdp: bad initial state");
  for (const auto& per_state : transitions) {
    if (static_cast<int>(per_state.size()) != num_actions) throw ParameterError("TabularMdp: action count mismatch");
    for (const auto& outcomes : per_state) {
      double total = 0.0;
      for (const auto& o : outcomes) {
        if (o.prob < 0.0 || o.next < -1 || o.next >= num_states()) throw ParameterError("TabularMdp: bad outcome");
        total += o.prob;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ParameterError("TabularMdp: outcome probabilities must sum to 1");
    }
  }
}

int LaserTagMdp::find(const std::array<lasertag::Pose, 2>& query) const {
  const auto it = index.find(joint_code(query));
  return it == index.end() ? -1 : it->second;
}

LaserTagMdp build_lasertag_mdp_indexed(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent,
                                       std::size_t max_states, int student_index) {
  using namespace lasertag;
  if (student_index != 0 && student_index != 1) throw ParameterError("build_lasertag_mdp: bad student index");
  if (!opponent.params) throw ParameterError("build_lasertag_mdp: null opponent");
  const int other = 1 - student_index;
  LaserTagMdp out;
  TabularMdp& mdp = out.mdp;
  mdp.num_actions = kNumActions;

  const LaserTagState start = reset(level, INT_MAX);
  auto& index = out.index;
  std::deque<int> frontier;
  auto intern = [&](const std::array<Pose, 2>& poses) {
    const int code = joint_code(poses);
    const auto it = index.find(code);
    if (it != index.end()) return it->second;
    if (out.poses.size() >= max_states) {
      throw CapacityError("build_lasertag_mdp: more than " + std::to_string(max_states) + " joint states");
    }
    const int id = static_cast<int>(out.poses.size());
    index.emplace(code, id);
    out.poses.push_back(poses);
    frontier.push_back(id);
    return id;
  };
  mdp.initial_state = intern(start.poses);

  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    LaserTagState state = start;
    state.poses = out.poses[static_cast<std::size_t>(s)];
    const Eigen::VectorXd opp = action_distribution(*opponent.params, observe(state, other), opponent.greedy);

    std::vector<std::vector<Outcome>> per_action(kNumActions);
    for (int a = 0; a < kNumActions; ++a) {
      std::vector<Outcome>& outcomes = per_action[static_cast<std::size_t>(a)];
      for (int b = 0; b < kNumActions; ++b) {
        if (opp[b] <= 0.0) continue;
        std::array<Action, 2> actions{};
        actions[static_cast<std::size_t>(student_index)] = static_cast<Action>(a);
        actions[static_cast<std::size_t>(other)] = static_cast<Action>(b);
        const StepResult r = step(state, actions);
        const double reward = r.rewards[static_cast<std::size_t>(student_index)];
        const int next = r.state.terminated ? -1 : intern(r.state.poses);
        auto same = std::find_if(outcomes.begin(), outcomes.end(),
                                 [&](const Outcome& o) { return o.next == next && o.reward == reward; });
        if (same != outcomes.end()) {
          same->prob += opp[b];
        } else {
          outcomes.push_back(Outcome{opp[b], next, reward});
        }
      }
    }
    if (mdp.transitions.size() <= static_cast<std::size_t>(s)) mdp.transitions.resize(static_cast<std::size_t>(s) + 1);
    mdp.transitions[static_cast<std::size_t>(s)] = std::move(per_action);
    // Observations are filled in order of discovery below.
  }
  mdp.transitions.resize(out.poses.size());
  mdp.observations.reserve(out.poses.size());
  for (const auto& poses : out.poses) {
    LaserTagState state = start;
    state.poses = poses;
    mdp.observations.push_back(observe(state, student_index));
  }
  return out;
}

TabularMdp build_lasertag_mdp(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent,
                              std::size_t max_states, int student_index) {
  return build_lasertag_mdp_indexed(level, opponent, max_states, student_index).mdp;
}

double bellman_q(const TabularMdp& mdp, const std::vector<double>& values, int s, int a, double gamma) {
  double q = 0.0;
  for (const Outcome& o : mdp.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
    q += o.prob * (o.reward + (o.next >= 0 ? gamma * values[static_cast<std::size_t>(o.next)] : 0.0));
  }
  return q;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double gamma, double tolerance, long max_sweeps) {
  check_gamma(gamma);
  if (!(tolerance > 0.0)) throw ParameterError("value_iteration: tolerance must be positive");
  ValueIterationResult result;
  result.values.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);
  auto& v = result.values;
  while (true) {
    double delta = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      double best = -INFINITY;
      for (int a = 0; a < mdp.num_actions; ++a) best = std::max(best, bellman_q(mdp, v, s, a, gamma));
      delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(s)]));
      v[static_cast<std::size_t>(s)] = best;
    }
    result.sweeps += 1;
    if (delta <= 0.1 * tolerance) {
      result.residual = jacobi_residual(mdp, v, gamma, nullptr);
      if (result.residual <= tolerance) break;
    }
    if (result.sweeps >= max_sweeps) {
      result.residual = jacobi_residual(mdp, v, gamma, nullptr);
      throw ConvergenceError("value_iteration: sweep budget exhausted", result.residual);
    }
  }
  result.greedy.resize(v.size());
  for (int s = 0; s < mdp.num_states(); ++s) {
    int best_a = 0;
    double best_q = bellman_q(mdp, v, s, 0, gamma);
    for (int a = 1; a < mdp.num_actions; ++a) {
      const double q = bellman_q(mdp, v, s, a, gamma);
      if (q > best_q) {
        best_q = q;
        best_a = a;
      }
    }
    result.greedy[static_cast<std::size_t>(s)] = best_a;
  }
  return result;
}

PolicyEvaluation evaluate_policy(const TabularMdp& mdp, const std::vector<std::vector<double>>& policy, double gamma,
                                 double tolerance, long max_sweeps) {
  check_gamma(gamma);
  if (!(tolerance > 0.0)) throw ParameterError("evaluate_policy: tolerance must be positive");
  if (static_cast<int>(policy.size()) != mdp.num_states()) throw ParameterError("evaluate_policy: policy size mismatch");
  PolicyEvaluation result;
  result.values.assign(policy.size(), 0.0);
  auto& v = result.values;
  long sweeps = 0;
  while (true) {
    double delta = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      double backup = 0.0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double p = policy[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        if (p > 0.0) backup += p * bellman_q(mdp, v, s, a, gamma);
      }
      delta = std::max(delta, std::abs(backup - v[static_cast<std::size_t>(s)]));
      v[static_cast<std::size_t>(s)] = backup;
    }
    ++sweeps;
    if (delta <= 0.1 * tolerance) {
      result.residual = jacobi_residual(mdp, v, gamma, &policy);
      if (result.residual <= tolerance) return result;
    }
    if (sweeps >= max_sweeps) {
      result.residual = jacobi_residual(mdp, v, gamma, &policy);
      throw ConvergenceError("evaluate_policy: sweep budget exhausted", result.residual);
    }
  }
}

std::vector<std::vector<double>> state_policy(const TabularMdp& mdp, const PolicyParams& policy, bool greedy) {
  if (static_cast<int>(mdp.observations.size()) != mdp.num_states()) {
    throw ParameterError("state_policy: MDP carries no observations");
  }
  if (policy.num_actions != mdp.num_actions) throw ParameterError("state_policy: action count mismatch");
  std::vector<std::vector<double>> out;
  out.reserve(mdp.observations.size());
  for (const auto& obs : mdp.observations) {
    const Eigen::VectorXd p = action_distribution(policy, obs, greedy);
    out.emplace_back(p.data(), p.data() + p.size());
  }
  return out;
}

BestResponse best_response_tabular(const TabularMdp& mdp, double gamma, double tolerance) {
  mdp.validate();
  ValueIterationResult vi = value_iteration(mdp, gamma, tolerance);
  BestResponse br;
  br.actions = std::move(vi.greedy);
  br.value = vi.values[static_cast<std::size_t>(mdp.initial_state)];
  br.residual = vi.residual;
  br.state_values = std::move(vi.values);
  return br;
}

BestResponse best_response_tabular(const lasertag::LaserTagParams& level, const FrozenPolicy& opponent, double gamma,
                                   double tolerance, std::size_t max_states) {
  return best_response_tabular(build_lasertag_mdp(level, opponent, max_states), gamma, tolerance);
}

}  // namespace maestro
