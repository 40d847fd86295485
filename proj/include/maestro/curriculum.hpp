#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "maestro/env_params.hpp"
#include "maestro/policy.hpp"
#include "maestro/regret.hpp"
#include "maestro/rng.hpp"

namespace maestro {

struct ReplayEntry {
  EnvParams params;
  std::uint64_t env_hash = 0;
  double score = 0.0;
  long last_sampled_at = 0;
  long insert_at = 0;
};

ReplayEntry make_entry(EnvParams params, double score, long now);

// Top-K environment buffer Λ owned by one co-player (or shared, owner -1).
class EnvBuffer {
 public:
  enum class InsertOutcome { kUpdated, kAppended, kReplaced, kRejected };

  EnvBuffer(int capacity, int owner);

  // Existing θ: score and timestamps overwritten. Otherwise appended while
  // below capacity, else replaces the lowest-score entry (oldest insert_at
  // among ties) when the new score is strictly higher.
  InsertOutcome insert(ReplayEntry entry);

  int capacity() const { return capacity_; }
  int owner() const { return owner_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ReplayEntry>& entries() const { return entries_; }
  const ReplayEntry& at(std::size_t i) const { return entries_.at(i); }
  // Index of θ, or -1.
  int find(const EnvParams& params) const;
  // -inf for an empty buffer.
  double max_score() const;
  double min_score() const;
  void mark_sampled(std::size_t i, long now);

  friend void to_json(nlohmann::json& j, const EnvBuffer& b);
  static EnvBuffer from_json(const nlohmann::json& j);

 private:
  std::size_t min_index() const;

  int capacity_;
  int owner_;
  std::vector<ReplayEntry> entries_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index_;
};

struct ReplayDistributionConfig {
  double replay_probability = 0.5;
  double staleness_coef = 0.3;
  double temperature = 0.3;

  void validate() const;
};

// P = (1 - rho) P_score + rho P_stale, P_score ∝ rank^(-1/beta) (rank 1 is the
// highest score, ties to the older insert), P_stale ∝ now - last_sampled_at
// (uniform when all staleness values are zero).
std::vector<double> replay_distribution(const EnvBuffer& buffer, const ReplayDistributionConfig& cfg, long now);

struct MaestroConfig {
  double lambda = 0.1;
  long checkpoint_interval = 8000;
  int member_capacity = 1000;
  Estimator estimator = Estimator::kMaxMc;

  void validate() const;
};

// Outcomes of the student against one member, 1 win / 0.5 draw / 0 loss.
class WinHistory {
 public:
  explicit WinHistory(std::size_t capacity = 128) : capacity_(capacity) {}
  void push(double outcome);
  // Mean outcome, 0.5 when nothing has been recorded.
  double win_rate() const;
  std::size_t size() const { return outcomes_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<double>& outcomes() const { return outcomes_; }

 private:
  std::size_t capacity_;
  std::deque<double> outcomes_;
};

struct Population {
  std::vector<FrozenPolicy> members;
  std::vector<EnvBuffer> buffers;  // one per member for MAESTRO, otherwise empty
  std::vector<WinHistory> win_history;

  std::size_t size() const { return members.size(); }
  // Appends a member, its win history and (when per_member_capacity > 0) an
  // empty buffer.
  void add(FrozenPolicy member, int per_member_capacity, std::size_t win_window = 128);
  std::vector<double> win_rates() const;
};

// Regret-proportional co-player weights with the λ/N floor.
std::vector<double> coplayer_distribution(const Population& pop, double lambda);
int select_coplayer(const Population& pop, const MaestroConfig& cfg, Rng& rng);

std::vector<double> uniform_coplayer_distribution(std::size_t n);
int select_coplayer_random(const Population& pop, Rng& rng);
int select_coplayer_fsp(const Population& pop, Rng& rng);

// weight_i ∝ (1 - winrate_i)^power + smoothing.
std::vector<double> pfsp_distribution(const std::vector<double>& win_rates, double power, double smoothing);
int select_coplayer_pfsp(const Population& pop, double power, double smoothing, Rng& rng);

// Self-play "co-player": the live student.
inline constexpr int kSelfPlay = -1;
inline int select_coplayer_sp() { return kSelfPlay; }

}  // namespace maestro
