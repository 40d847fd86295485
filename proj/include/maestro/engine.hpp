#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "maestro/curriculum.hpp"
#include "maestro/env_params.hpp"
#include "maestro/policy.hpp"
#include "maestro/regret.hpp"
#include "maestro/uposg.hpp"

namespace maestro {

enum class Method { kMaestro, kMaestroR, kMaestroP, kDrSp, kDrFsp, kDrPfsp, kPlrSp, kPlrFsp, kPlrPfsp };

enum class EnvCurriculum { kDomainRandomization, kPlr, kMaestro };
enum class CoplayerSampler { kSelfPlay, kFsp, kPfsp, kRegret, kUniform };

const char* method_name(Method m);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();
EnvCurriculum env_curriculum(Method m);
CoplayerSampler coplayer_sampler(Method m);

// One played episode from the student's side.
struct Episode {
  Trajectory trajectory;
  double outcome = 0.5;  // 1 student win, 0.5 draw, 0 loss
  double undiscounted_return = 0.0;
  std::optional<double> exact_regret;
  int coplayer_action = -1;  // matrix testbed: the co-player's column
};

// What the curriculum engine needs from an environment plus student learner.
// play() must be safe to call concurrently; train() is single-writer.
class TrainingDomain {
 public:
  virtual ~TrainingDomain() = default;

  virtual EnvParams generate(std::uint64_t seed) const = 0;
  // coplayer == nullptr plays the live student against itself.
  virtual Episode play(const EnvParams& env, const FrozenPolicy* coplayer, std::uint64_t seed) const = 0;
  // Queues a trained-on episode; returns true when a student update ran.
  virtual bool train(Episode episode, std::uint64_t update_seed) = 0;
  virtual PolicyParams student_snapshot() const = 0;
  virtual GaeConfig gae() const = 0;
  virtual double wall_density(const EnvParams&) const { return 0.0; }
  virtual double grid_size(const EnvParams&) const { return 0.0; }

  virtual nlohmann::json save() const = 0;
  virtual void load(const nlohmann::json& j) = 0;
};

struct EngineConfig {
  Method method = Method::kMaestro;
  ReplayDistributionConfig replay;
  MaestroConfig maestro;
  int plr_capacity = 4000;
  double pfsp_power = 2.0;
  double pfsp_smoothing = 0.1;
  int win_window = 128;
  int num_workers = 1;
  long budget_updates = 1000;
  long max_iterations = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EventRecord {
  long iteration = 0;
  std::string branch;  // "replay" or "new"
  bool fallback = false;  // replay requested on an empty buffer
  int coplayer_id = kSelfPlay;
  std::uint64_t env_seed = 0;
  std::uint64_t env_hash = 0;
  double score = 0.0;
  bool trained = false;
  bool updated = false;
  std::vector<int> buffer_sizes;
  long update = 0;
  double episode_return = 0.0;
  double outcome = 0.5;
  int length = 0;
  double wall_density = 0.0;
  double grid_size = 0.0;
  int population_size = 0;
  int new_member = -1;
};

nlohmann::json to_json(const EventRecord& r);
EventRecord event_from_json(const nlohmann::json& j);

class CurriculumEngine {
 public:
  CurriculumEngine(EngineConfig cfg, TrainingDomain& domain);

  // Decides up to num_workers iterations against the current state, collects
  // their episodes (in parallel when num_workers > 1) and applies them in
  // submission order.
  std::vector<EventRecord> run_round();
  bool finished() const;

  long iterations() const { return iterations_; }
  long updates() const { return updates_; }
  const EngineConfig& config() const { return cfg_; }
  const Population& population() const { return population_; }
  Population& mutable_population() { return population_; }
  // The PLR buffer shared by all co-players (empty optional otherwise).
  const std::optional<EnvBuffer>& shared_buffer() const { return shared_buffer_; }
  std::optional<EnvBuffer>& mutable_shared_buffer() { return shared_buffer_; }
  const MaxReturnRegistry& registry() const { return registry_; }

  nlohmann::json save_state() const;
  void load_state(const nlohmann::json& j);

 private:
  struct Decision {
    long iteration = 0;
    int coplayer = kSelfPlay;
    bool replay = false;
    bool fallback = false;
    EnvParams env;
    std::uint64_t play_seed = 0;
  };

  Decision decide(long iteration);
  EventRecord apply(const Decision& d, Episode episode);
  EnvBuffer* buffer_for(int coplayer);
  bool uses_population() const;

  EngineConfig cfg_;
  TrainingDomain& domain_;
  Population population_;
  std::optional<EnvBuffer> shared_buffer_;
  MaxReturnRegistry registry_;
  long iterations_ = 0;
  long updates_ = 0;
};

}  // namespace maestro
