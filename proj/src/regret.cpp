#include "maestro/regret.hpp"

#include <algorithm>

#include "maestro/errors.hpp"
#include "maestro/tabular.hpp"

namespace maestro {

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kMaxMc: return "maxmc";
    case Estimator::kPvl: return "pvl";
    case Estimator::kExact: return "exact";
  }
  return "unknown";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "maxmc") return Estimator::kMaxMc;
  if (name == "pvl") return Estimator::kPvl;
  if (name == "exact") return Estimator::kExact;
  throw ParameterError("unknown estimator '" + name + "'");
}

double MaxReturnRegistry::update(const Key& key, double episodic_return) {
  auto [it, inserted] = values_.emplace(key, episodic_return);
  if (!inserted) it->second = std::max(it->second, episodic_return);
  return it->second;
}

double MaxReturnRegistry::get(const Key& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

void to_json(nlohmann::json& j, const MaxReturnRegistry& r) {
  j = nlohmann::json::array();
  for (const auto& [key, value] : r.values_) j.push_back({key.first, key.second, value});
}

void from_json(const nlohmann::json& j, MaxReturnRegistry& r) {
  r.values_.clear();
  for (const auto& item : j) {
    r.values_[{item.at(0).get<std::uint64_t>(), item.at(1).get<int>()}] = item.at(2).get<double>();
  }
}

MaxReturnRegistry& update_max_return(MaxReturnRegistry& registry, const MaxReturnRegistry::Key& key,
                                     double episodic_return) {
  registry.update(key, episodic_return);
  return registry;
}

RegretScore score_maxmc(const Trajectory& trajectory, double r_max) {
  if (trajectory.size() == 0) throw ParameterError("score_maxmc: empty trajectory");
  double total = 0.0;
  for (double v : trajectory.values) total += r_max - v;
  return {total / static_cast<double>(trajectory.size()), Estimator::kMaxMc, 1};
}

RegretScore score_pvl(const Trajectory& trajectory, const GaeConfig& cfg) {
  if (trajectory.size() == 0) throw ParameterError("score_pvl: empty trajectory");
  double total = 0.0;
  for (double a : gae_advantages(trajectory, cfg)) total += std::max(a, 0.0);
  return {total / static_cast<double>(trajectory.size()), Estimator::kPvl, 1};
}

ExactRegret score_exact(const lasertag::LaserTagParams& env, const FrozenPolicy& opponent, const PolicyParams& student,
                        double gamma, double tolerance, bool greedy_student, std::size_t max_states) {
  const TabularMdp mdp = build_lasertag_mdp(env, opponent, max_states);
  const BestResponse br = best_response_tabular(mdp, gamma, tolerance);
  const PolicyEvaluation eval = evaluate_policy(mdp, state_policy(mdp, student, greedy_student), gamma, tolerance);
  ExactRegret out;
  out.optimal_value = br.value;
  out.student_value = eval.values[static_cast<std::size_t>(mdp.initial_state)];
  out.residual = br.residual;
  out.score = {out.optimal_value - out.student_value, Estimator::kExact, 0};
  return out;
}

}  // namespace maestro
