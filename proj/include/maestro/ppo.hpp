#pragma once

#include <span>
#include <vector>

#include "maestro/policy.hpp"
#include "maestro/rng.hpp"
#include "maestro/uposg.hpp"

namespace maestro {

struct PpoConfig {
  double learning_rate = 1e-4;
  double clip_range = 0.2;
  double value_loss_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  int epochs = 5;
  int minibatches = 4;
  int rollout_length = 256;
  int num_workers = 1;
  GaeConfig gae;
  bool clip_value_loss = true;
  bool normalize_advantages = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;

  void validate() const;
};

// One timestep prepared for the surrogate.
struct PpoSample {
  Observation obs;
  int action = 0;
  double old_log_prob = 0.0;
  double old_value = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
};

// GAE advantages and value targets for every step of every trajectory.
std::vector<PpoSample> build_samples(const std::vector<Trajectory>& batch, const GaeConfig& gae);

// Zero mean, unit variance; left alone for fewer than two samples.
void normalize_advantages(std::vector<PpoSample>& samples);

struct LossTerms {
  double total = 0.0;        // minimized: -surrogate + c_v * value_loss - c_e * entropy
  double policy_loss = 0.0;  // -surrogate
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Loss over `samples` (means over samples) and, when grad is non-null, its
// exact gradient with respect to policy.weights. Tabular rows for every
// sample observation must exist.
LossTerms ppo_loss_and_gradient(const PolicyParams& policy, std::span<const PpoSample> samples,
                                const PpoConfig& cfg, std::vector<double>* grad);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

void to_json(nlohmann::json& j, const AdamState& s);
void from_json(const nlohmann::json& j, AdamState& s);

struct PpoDiagnostics {
  LossTerms last;
  double grad_norm = 0.0;  // before clipping, last minibatch
  int num_samples = 0;
  int minibatch_steps = 0;
};

// cfg.epochs passes over cfg.minibatches shuffled minibatches with global
// gradient-norm clipping and Adam. On a non-finite loss or gradient the
// policy and optimizer state are restored and NumericalError is thrown.
PpoDiagnostics ppo_update(PolicyParams& policy, const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                          AdamState& adam, Rng& rng);

}  // namespace maestro
