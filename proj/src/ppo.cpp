#include "maestro/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maestro/errors.hpp"

namespace maestro {

void PpoConfig::validate() const {
  if (!(clip_range > 0.0)) throw ParameterError("PpoConfig: clip_range must be positive");
  if (epochs < 1 || minibatches < 1) throw ParameterError("PpoConfig: epochs and minibatches must be >= 1");
  if (rollout_length < 1 || num_workers < 1) throw ParameterError("PpoConfig: counts must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("PpoConfig: learning_rate must be positive");
  if (!(max_grad_norm > 0.0)) throw ParameterError("PpoConfig: max_grad_norm must be positive");
  if (value_loss_coef < 0.0 || entropy_coef < 0.0) throw ParameterError("PpoConfig: loss coefficients must be >= 0");
  if (!(adam_eps > 0.0)) throw ParameterError("PpoConfig: adam_eps must be positive");
  gae.validate();
}

std::vector<PpoSample> build_samples(const std::vector<Trajectory>& batch, const GaeConfig& gae) {
  std::vector<PpoSample> samples;
  for (const Trajectory& t : batch) {
    const std::vector<double> adv = gae_advantages(t, gae);
    for (std::size_t i = 0; i < t.size(); ++i) {
      samples.push_back(PpoSample{t.observations[i], t.actions[i], t.log_probs[i], t.values[i], adv[i],
                                  adv[i] + t.values[i]});
    }
  }
  return samples;
}

void normalize_advantages(std::vector<PpoSample>& samples) {
  if (samples.size() < 2) return;
  double mean = 0.0;
  for (const auto& s : samples) mean += s.advantage;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const auto& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
  var /= static_cast<double>(samples.size());
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (auto& s : samples) s.advantage = (s.advantage - mean) * scale;
}

LossTerms ppo_loss_and_gradient(const PolicyParams& policy, std::span<const PpoSample> samples,
                                const PpoConfig& cfg, std::vector<double>* grad) {
  if (samples.empty()) throw ParameterError("ppo_loss_and_gradient: empty sample set");
  if (grad) grad->assign(policy.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double eps = cfg.clip_range;
  LossTerms terms;
  for (const PpoSample& s : samples) {
    const PolicyOutput out = evaluate(policy, s.obs);
    const Eigen::VectorXd logp = log_softmax(out.logits);
    const Eigen::VectorXd probs = logp.array().exp();
    const double log_ratio = logp[s.action] - s.old_log_prob;
    const double ratio = std::exp(log_ratio);
    const double unclipped = ratio * s.advantage;
    const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double clipped = clipped_ratio * s.advantage;
    // The min picks the unclipped branch unless clipping binds.
    const bool use_unclipped = unclipped <= clipped;
    terms.policy_loss -= std::min(unclipped, clipped) * inv_n;
    if (std::abs(ratio - 1.0) > eps) terms.clip_fraction += inv_n;
    terms.approx_kl += (ratio - 1.0 - log_ratio) * inv_n;

    const double entropy = -probs.dot(logp);
    terms.entropy += entropy * inv_n;

    const double err = out.value - s.value_target;
    double value_loss = 0.5 * err * err;
    double dvalue = err;
    if (cfg.clip_value_loss) {
      const double v_clipped = s.old_value + std::clamp(out.value - s.old_value, -eps, eps);
      const double err_clipped = v_clipped - s.value_target;
      const double loss_clipped = 0.5 * err_clipped * err_clipped;
      if (loss_clipped > value_loss) {
        value_loss = loss_clipped;
        const bool inside = std::abs(out.value - s.old_value) < eps;
        dvalue = inside ? err_clipped : 0.0;
      }
    }
    terms.value_loss += value_loss * inv_n;

    if (!grad) continue;
    // d(-min(...))/d(logits): -A * ratio * d(log pi(a)) when the unclipped term
    // is active, else zero (the clipped ratio is flat or equal).
    Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(policy.num_actions);
    if (use_unclipped) {
      Eigen::VectorXd dlogp = -probs;
      dlogp[s.action] += 1.0;
      dlogits -= s.advantage * ratio * dlogp;
    }
    if (cfg.entropy_coef != 0.0) {
      // dH/dz_k = -p_k (log p_k + H)
      const Eigen::VectorXd dentropy = -(probs.array() * (logp.array() + entropy)).matrix();
      dlogits -= cfg.entropy_coef * dentropy;
    }
    accumulate_gradient(policy, s.obs, dlogits * inv_n, cfg.value_loss_coef * dvalue * inv_n, *grad);
  }
  terms.total = terms.policy_loss + cfg.value_loss_coef * terms.value_loss - cfg.entropy_coef * terms.entropy;
  return terms;
}

void to_json(nlohmann::json& j, const AdamState& s) { j = {{"m", s.m}, {"v", s.v}, {"step", s.step}}; }

void from_json(const nlohmann::json& j, AdamState& s) {
  s.m = j.at("m").get<std::vector<double>>();
  s.v = j.at("v").get<std::vector<double>>();
  s.step = j.at("step").get<long>();
}

PpoDiagnostics ppo_update(PolicyParams& policy, const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                          AdamState& adam, Rng& rng) {
  cfg.validate();
  if (batch.empty()) throw ParameterError("ppo_update: empty batch");
  std::vector<PpoSample> samples = build_samples(batch, cfg.gae);
  if (samples.empty()) throw ParameterError("ppo_update: batch has no steps");
  if (cfg.normalize_advantages) normalize_advantages(samples);

  const PolicyParams backup_policy = policy;
  const AdamState backup_adam = adam;
  if (policy.representation == Representation::kTabular) {
    for (const auto& s : samples) policy.ensure_row(s.obs);
  }
  adam.m.resize(policy.weights.size(), 0.0);
  adam.v.resize(policy.weights.size(), 0.0);

  PpoDiagnostics diag;
  diag.num_samples = static_cast<int>(samples.size());
  const int num_minibatches = std::min<int>(cfg.minibatches, static_cast<int>(samples.size()));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<PpoSample> minibatch;

  auto abort = [&](const std::string& what) {
    policy = backup_policy;
    adam = backup_adam;
    throw NumericalError("ppo_update: " + what);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (int mb = 0; mb < num_minibatches; ++mb) {
      const std::size_t begin = samples.size() * static_cast<std::size_t>(mb) / static_cast<std::size_t>(num_minibatches);
      const std::size_t end =
          samples.size() * static_cast<std::size_t>(mb + 1) / static_cast<std::size_t>(num_minibatches);
      minibatch.clear();
      for (std::size_t i = begin; i < end; ++i) minibatch.push_back(samples[order[i]]);

      const LossTerms terms = ppo_loss_and_gradient(policy, minibatch, cfg, &grad);
      if (!std::isfinite(terms.total)) abort("non-finite loss");
      double norm_sq = 0.0;
      for (double g : grad) norm_sq += g * g;
      const double norm = std::sqrt(norm_sq);
      if (!std::isfinite(norm)) abort("non-finite gradient");
      const double scale = norm > cfg.max_grad_norm ? cfg.max_grad_norm / norm : 1.0;

      adam.step += 1;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i] * scale;
        adam.m[i] = cfg.adam_beta1 * adam.m[i] + (1.0 - cfg.adam_beta1) * g;
        adam.v[i] = cfg.adam_beta2 * adam.v[i] + (1.0 - cfg.adam_beta2) * g * g;
        policy.weights[i] -= cfg.learning_rate * (adam.m[i] / bc1) / (std::sqrt(adam.v[i] / bc2) + cfg.adam_eps);
      }
      diag.last = terms;
      diag.grad_norm = norm;
      diag.minibatch_steps += 1;
    }
  }
  return diag;
}

}  // namespace maestro
