#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maestro/engine.hpp"
#include "maestro/lasertag.hpp"
#include "maestro/ppo.hpp"

namespace maestro {

struct LaserTagDomainConfig {
  lasertag::GeneratorConfig generator;
  int max_episode_steps = lasertag::kDefaultMaxEpisodeSteps;
  Representation representation = Representation::kMlp;
  int hidden = 32;
  PpoConfig ppo;
  // When set, generate() always returns this held-out level (specialists).
  std::optional<std::string> fixed_level;
  std::uint64_t init_seed = 0;
};

ObservationEncoding lasertag_encoding();

struct MatchOutcome {
  std::array<double, 2> returns{};  // undiscounted
  int winner = -1;                  // -1 draw
  int length = 0;
};

// One episode between two policies (agent 0 plays `a`).
MatchOutcome play_match(const lasertag::LaserTagParams& level, const PolicyParams& a, bool greedy_a,
                        const PolicyParams& b, bool greedy_b, std::uint64_t seed, int max_episode_steps);

class LaserTagDomain : public TrainingDomain {
 public:
  explicit LaserTagDomain(LaserTagDomainConfig cfg);

  EnvParams generate(std::uint64_t seed) const override;
  Episode play(const EnvParams& env, const FrozenPolicy* coplayer, std::uint64_t seed) const override;
  bool train(Episode episode, std::uint64_t update_seed) override;
  PolicyParams student_snapshot() const override { return student_; }
  GaeConfig gae() const override { return cfg_.ppo.gae; }
  double wall_density(const EnvParams& env) const override;
  double grid_size(const EnvParams& env) const override;
  nlohmann::json save() const override;
  void load(const nlohmann::json& j) override;

  const PolicyParams& student() const { return student_; }
  PolicyParams& mutable_student() { return student_; }
  const LaserTagDomainConfig& config() const { return cfg_; }
  const PpoDiagnostics& last_diagnostics() const { return last_diag_; }

 private:
  LaserTagDomainConfig cfg_;
  PolicyParams student_;
  AdamState adam_;
  std::vector<Trajectory> pending_;
  int pending_steps_ = 0;
  PpoDiagnostics last_diag_;
};

}  // namespace maestro
