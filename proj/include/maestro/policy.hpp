#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "maestro/rng.hpp"
#include "maestro/uposg.hpp"

namespace maestro {

enum class Representation { kTabular, kMlp };

const char* representation_name(Representation r);
Representation parse_representation(const std::string& name);

// Observations are `cells` symbols, each in [0, codes). The MLP sees their
// one-hot concatenation.
struct ObservationEncoding {
  int cells = 25;
  int codes = 5;

  int input_size() const { return cells * codes; }
  friend bool operator==(const ObservationEncoding&, const ObservationEncoding&) = default;
};

// Actor-critic parameters.
//
// Tabular: one row of (num_actions logits, value) per distinct observation.
// Row 0 is the default row used for observations not yet in the table; rows
// are appended in first-seen order, so tables are deterministic.
// Mlp: one-hot input -> hidden tanh -> hidden tanh -> policy and value heads,
// all weights in one flat vector.
struct PolicyParams {
  Representation representation = Representation::kTabular;
  int num_actions = 0;
  ObservationEncoding encoding;
  int hidden = 0;
  std::vector<double> weights;
  std::vector<Observation> row_keys;  // tabular rows 1.. in order
  std::unordered_map<std::string, int> row_index;

  int row_width() const { return num_actions + 1; }
  std::size_t num_weights() const { return weights.size(); }

  // Tabular row for `obs`, or 0 when unseen.
  int find_row(const Observation& obs) const;
  // Tabular row for `obs`, appending a copy of the default row if needed.
  int ensure_row(const Observation& obs);

  void check_observation(const Observation& obs) const;
  void validate() const;
};

PolicyParams make_tabular_policy(int num_actions, ObservationEncoding encoding);
PolicyParams make_mlp_policy(int num_actions, ObservationEncoding encoding, int hidden, Rng& rng);
// Tabular policy whose default row prefers `action`; used with greedy
// evaluation for scripted opponents.
PolicyParams make_constant_policy(int num_actions, ObservationEncoding encoding, int action);

struct PolicyOutput {
  Eigen::VectorXd logits;
  double value = 0.0;
};

PolicyOutput evaluate(const PolicyParams& policy, const Observation& obs);

// Accumulates d(loss)/d(weights) into grad given d(loss)/d(logits) and
// d(loss)/d(value) at `obs`. Tabular rows must already exist (ensure_row).
void accumulate_gradient(const PolicyParams& policy, const Observation& obs, const Eigen::VectorXd& dlogits,
                         double dvalue, std::vector<double>& grad);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
// Lowest index among maximal entries.
int argmax_lowest(const Eigen::VectorXd& v);

// Action distribution: softmax of the logits, or the one-hot argmax when greedy.
Eigen::VectorXd action_distribution(const PolicyParams& policy, const Observation& obs, bool greedy);

struct ActResult {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};

// Samples an action (or takes the argmax when greedy; log_prob is then that
// of the stochastic policy).
ActResult act(const PolicyParams& policy, const Observation& obs, Rng& rng, bool greedy = false);

// An immutable population member.
struct FrozenPolicy {
  std::shared_ptr<const PolicyParams> params;
  int checkpoint_id = 0;
  long creation_update = 0;
  bool greedy = false;
};

FrozenPolicy freeze(const PolicyParams& policy, int checkpoint_id, long creation_update);

void to_json(nlohmann::json& j, const PolicyParams& p);
void from_json(const nlohmann::json& j, PolicyParams& p);
nlohmann::json checkpoint_json(const FrozenPolicy& f);
FrozenPolicy frozen_from_json(const nlohmann::json& j);

}  // namespace maestro
