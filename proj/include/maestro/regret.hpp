#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "json.hpp"
#include "maestro/lasertag.hpp"
#include "maestro/policy.hpp"
#include "maestro/uposg.hpp"

namespace maestro {

enum class Estimator { kMaxMc, kPvl, kExact };

const char* estimator_name(Estimator e);
Estimator parse_estimator(const std::string& name);

struct RegretScore {
  double value = 0.0;
  Estimator estimator = Estimator::kMaxMc;
  int episodes = 1;
};

// Highest episodic return seen per (environment hash, co-player checkpoint).
// Co-player -1 keys environment-only entries.
class MaxReturnRegistry {
 public:
  using Key = std::pair<std::uint64_t, int>;

  // Stores max(old, episodic_return) and returns the stored value.
  double update(const Key& key, double episodic_return);
  // Highest return for key, or fallback when the key is absent.
  double get(const Key& key, double fallback) const;
  bool contains(const Key& key) const { return values_.count(key) != 0; }
  std::size_t size() const { return values_.size(); }

  friend void to_json(nlohmann::json& j, const MaxReturnRegistry& r);
  friend void from_json(const nlohmann::json& j, MaxReturnRegistry& r);

 private:
  std::map<Key, double> values_;
};

MaxReturnRegistry& update_max_return(MaxReturnRegistry& registry, const MaxReturnRegistry::Key& key,
                                     double episodic_return);

// mean_t (r_max - V(s_t)); not clipped at zero.
RegretScore score_maxmc(const Trajectory& trajectory, double r_max);

// mean_t max(A_t, 0) with A_t the GAE advantage.
RegretScore score_pvl(const Trajectory& trajectory, const GaeConfig& cfg);

struct ExactRegret {
  RegretScore score;
  double optimal_value = 0.0;
  double student_value = 0.0;
  double residual = 0.0;  // Bellman residual of the optimal values
};

// V*(s0) - V^student(s0) on the MDP induced by the frozen opponent, with the
// student acting from its own observations.
ExactRegret score_exact(const lasertag::LaserTagParams& env, const FrozenPolicy& opponent, const PolicyParams& student,
                        double gamma, double tolerance, bool greedy_student = false,
                        std::size_t max_states = 2'000'000);

}  // namespace maestro
