#include "maestro/policy.hpp"

#include <cmath>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

constexpr int kPolicyVersion = 1;

std::string obs_key(const Observation& obs) { return std::string(obs.begin(), obs.end()); }

struct MlpLayout {
  int d, h, a;
  std::size_t w1, b1, w2, b2, wp, bp, wv, bv, total;

  explicit MlpLayout(const PolicyParams& p) : d(p.encoding.input_size()), h(p.hidden), a(p.num_actions) {
    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
      const std::size_t start = at;
      at += n;
      return start;
    };
    const auto hs = static_cast<std::size_t>(h);
    w1 = take(hs * static_cast<std::size_t>(d));
    b1 = take(hs);
    w2 = take(hs * hs);
    b2 = take(hs);
    wp = take(static_cast<std::size_t>(a) * hs);
    bp = take(static_cast<std::size_t>(a));
    wv = take(hs);
    bv = take(1);
    total = at;
  }
};

using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Mat = Eigen::Map<Eigen::MatrixXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

struct MlpForward {
  Eigen::VectorXd h1, h2, logits;
  double value = 0.0;
};

MlpForward mlp_forward(const PolicyParams& p, const MlpLayout& l, const Observation& obs) {
  const double* w = p.weights.data();
  ConstMat w1(w + l.w1, l.h, l.d);
  MlpForward f;
  Eigen::VectorXd z1 = ConstVec(w + l.b1, l.h);
  for (int c = 0; c < p.encoding.cells; ++c) z1 += w1.col(c * p.encoding.codes + obs[static_cast<std::size_t>(c)]);
  f.h1 = z1.array().tanh();
  const Eigen::VectorXd z2 = ConstMat(w + l.w2, l.h, l.h) * f.h1 + ConstVec(w + l.b2, l.h);
  f.h2 = z2.array().tanh();
  f.logits = ConstMat(w + l.wp, l.a, l.h) * f.h2 + ConstVec(w + l.bp, l.a);
  f.value = ConstVec(w + l.wv, l.h).dot(f.h2) + w[l.bv];
  return f;
}

}  // namespace

const char* representation_name(Representation r) { return r == Representation::kTabular ? "tabular" : "mlp"; }

Representation parse_representation(const std::string& name) {
  if (name == "tabular") return Representation::kTabular;
  if (name == "mlp") return Representation::kMlp;
  throw ParameterError("unknown policy representation '" + name + "'");
}

int PolicyParams::find_row(const Observation& obs) const {
  const auto it = row_index.find(obs_key(obs));
  return it == row_index.end() ? 0 : it->second;
}

int PolicyParams::ensure_row(const Observation& obs) {
  if (representation != Representation::kTabular) throw UsageError("ensure_row: policy is not tabular");
  std::string key = obs_key(obs);
  const auto it = row_index.find(key);
  if (it != row_index.end()) return it->second;
  const int row = static_cast<int>(row_keys.size()) + 1;
  const auto width = static_cast<std::size_t>(row_width());
  const std::vector<double> default_row(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(width));
  weights.insert(weights.end(), default_row.begin(), default_row.end());
  row_keys.push_back(obs);
  row_index.emplace(std::move(key), row);
  return row;
}

void PolicyParams::check_observation(const Observation& obs) const {
  if (static_cast<int>(obs.size()) != encoding.cells) {
    throw ParameterError("observation has " + std::to_string(obs.size()) + " cells, policy expects " +
                         std::to_string(encoding.cells));
  }
  for (std::uint8_t v : obs) {
    if (v >= encoding.codes) throw ParameterError("observation code out of range");
  }
}

void PolicyParams::validate() const {
  if (num_actions < 1) throw ParameterError("PolicyParams: num_actions must be positive");
  if (encoding.cells < 1 || encoding.codes < 1) throw ParameterError("PolicyParams: bad observation encoding");
  if (representation == Representation::kTabular) {
    if (weights.size() != (row_keys.size() + 1) * static_cast<std::size_t>(row_width())) {
      throw ParameterError("PolicyParams: tabular weight count mismatch");
    }
  } else {
    if (hidden < 1) throw ParameterError("PolicyParams: hidden width must be positive");
    if (weights.size() != MlpLayout(*this).total) throw ParameterError("PolicyParams: mlp weight count mismatch");
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw ParameterError("PolicyParams: non-finite weight");
  }
}

PolicyParams make_tabular_policy(int num_actions, ObservationEncoding encoding) {
  PolicyParams p;
  p.representation = Representation::kTabular;
  p.num_actions = num_actions;
  p.encoding = encoding;
  p.weights.assign(static_cast<std::size_t>(num_actions + 1), 0.0);
  p.validate();
  return p;
}

PolicyParams make_mlp_policy(int num_actions, ObservationEncoding encoding, int hidden, Rng& rng) {
  PolicyParams p;
  p.representation = Representation::kMlp;
  p.num_actions = num_actions;
  p.encoding = encoding;
  p.hidden = hidden;
  const MlpLayout l(p);
  p.weights.assign(l.total, 0.0);
  // Uniform draws with variance scale^2 / fan_in.
  auto fill = [&](std::size_t start, std::size_t count, double fan_in, double scale) {
    const double bound = scale * std::sqrt(3.0 / fan_in);
    for (std::size_t i = 0; i < count; ++i) p.weights[start + i] = (2.0 * rng.uniform() - 1.0) * bound;
  };
  const auto hs = static_cast<std::size_t>(hidden);
  fill(l.w1, hs * static_cast<std::size_t>(l.d), encoding.cells, 1.0);
  fill(l.w2, hs * hs, hidden, 1.0);
  fill(l.wp, static_cast<std::size_t>(num_actions) * hs, hidden, 0.01);
  fill(l.wv, hs, hidden, 1.0);
  p.validate();
  return p;
}

PolicyParams make_constant_policy(int num_actions, ObservationEncoding encoding, int action) {
  if (action < 0 || action >= num_actions) throw ParameterError("make_constant_policy: action out of range");
  PolicyParams p = make_tabular_policy(num_actions, encoding);
  p.weights[static_cast<std::size_t>(action)] = 1.0;
  return p;
}

PolicyOutput evaluate(const PolicyParams& policy, const Observation& obs) {
  policy.check_observation(obs);
  PolicyOutput out;
  if (policy.representation == Representation::kTabular) {
    const auto base = static_cast<std::size_t>(policy.find_row(obs) * policy.row_width());
    out.logits = ConstVec(policy.weights.data() + base, policy.num_actions);
    out.value = policy.weights[base + static_cast<std::size_t>(policy.num_actions)];
    return out;
  }
  const MlpLayout l(policy);
  MlpForward f = mlp_forward(policy, l, obs);
  out.logits = std::move(f.logits);
  out.value = f.value;
  return out;
}

void accumulate_gradient(const PolicyParams& policy, const Observation& obs, const Eigen::VectorXd& dlogits,
                         double dvalue, std::vector<double>& grad) {
  policy.check_observation(obs);
  if (grad.size() != policy.weights.size()) throw ParameterError("accumulate_gradient: gradient size mismatch");
  if (policy.representation == Representation::kTabular) {
    const int row = policy.find_row(obs);
    if (row == 0) throw UsageError("accumulate_gradient: observation has no tabular row; call ensure_row first");
    const auto base = static_cast<std::size_t>(row * policy.row_width());
    for (int a = 0; a < policy.num_actions; ++a) grad[base + static_cast<std::size_t>(a)] += dlogits[a];
    grad[base + static_cast<std::size_t>(policy.num_actions)] += dvalue;
    return;
  }
  const MlpLayout l(policy);
  const MlpForward f = mlp_forward(policy, l, obs);
  const double* w = policy.weights.data();
  double* g = grad.data();

  const Eigen::VectorXd dh2 =
      ConstMat(w + l.wp, l.a, l.h).transpose() * dlogits + ConstVec(w + l.wv, l.h) * dvalue;
  const Eigen::VectorXd dz2 = dh2.array() * (1.0 - f.h2.array().square());
  Mat(g + l.wp, l.a, l.h) += dlogits * f.h2.transpose();
  Vec(g + l.bp, l.a) += dlogits;
  Vec(g + l.wv, l.h) += dvalue * f.h2;
  g[l.bv] += dvalue;
  Mat(g + l.w2, l.h, l.h) += dz2 * f.h1.transpose();
  Vec(g + l.b2, l.h) += dz2;
  const Eigen::VectorXd dh1 = ConstMat(w + l.w2, l.h, l.h).transpose() * dz2;
  const Eigen::VectorXd dz1 = dh1.array() * (1.0 - f.h1.array().square());
  Mat gw1(g + l.w1, l.h, l.d);
  for (int c = 0; c < policy.encoding.cells; ++c) gw1.col(c * policy.encoding.codes + obs[static_cast<std::size_t>(c)]) += dz1;
  Vec(g + l.b1, l.h) += dz1;
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) { return log_softmax(logits).array().exp(); }

int argmax_lowest(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

Eigen::VectorXd action_distribution(const PolicyParams& policy, const Observation& obs, bool greedy) {
  const PolicyOutput out = evaluate(policy, obs);
  if (!greedy) return softmax(out.logits);
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(policy.num_actions);
  probs[argmax_lowest(out.logits)] = 1.0;
  return probs;
}

ActResult act(const PolicyParams& policy, const Observation& obs, Rng& rng, bool greedy) {
  const PolicyOutput out = evaluate(policy, obs);
  const Eigen::VectorXd logp = log_softmax(out.logits);
  ActResult r;
  r.value = out.value;
  if (greedy) {
    r.action = argmax_lowest(out.logits);
  } else {
    const Eigen::VectorXd probs = logp.array().exp();
    r.action = static_cast<int>(rng.categorical(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size()))));
  }
  r.log_prob = logp[r.action];
  return r;
}

FrozenPolicy freeze(const PolicyParams& policy, int checkpoint_id, long creation_update) {
  FrozenPolicy f;
  f.params = std::make_shared<const PolicyParams>(policy);
  f.checkpoint_id = checkpoint_id;
  f.creation_update = creation_update;
  return f;
}

void to_json(nlohmann::json& j, const PolicyParams& p) {
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& k : p.row_keys) keys.push_back(std::vector<int>(k.begin(), k.end()));
  j = {{"version", kPolicyVersion},
       {"representation", representation_name(p.representation)},
       {"num_actions", p.num_actions},
       {"encoding", {{"cells", p.encoding.cells}, {"codes", p.encoding.codes}}},
       {"hidden", p.hidden},
       {"row_keys", keys},
       {"weights", p.weights}};
}

void from_json(const nlohmann::json& j, PolicyParams& p) {
  if (j.at("version").get<int>() != kPolicyVersion) throw ParameterError("PolicyParams: unsupported version");
  p = PolicyParams{};
  p.representation = parse_representation(j.at("representation").get<std::string>());
  p.num_actions = j.at("num_actions").get<int>();
  p.encoding.cells = j.at("encoding").at("cells").get<int>();
  p.encoding.codes = j.at("encoding").at("codes").get<int>();
  p.hidden = j.at("hidden").get<int>();
  p.weights = j.at("weights").get<std::vector<double>>();
  for (const auto& k : j.at("row_keys")) {
    const auto values = k.get<std::vector<int>>();
    Observation obs(values.begin(), values.end());
    p.row_index.emplace(obs_key(obs), static_cast<int>(p.row_keys.size()) + 1);
    p.row_keys.push_back(std::move(obs));
  }
  p.validate();
}

nlohmann::json checkpoint_json(const FrozenPolicy& f) {
  return {{"checkpoint_id", f.checkpoint_id},
          {"creation_update", f.creation_update},
          {"greedy", f.greedy},
          {"policy", *f.params}};
}

FrozenPolicy frozen_from_json(const nlohmann::json& j) {
  FrozenPolicy f;
  f.params = std::make_shared<const PolicyParams>(j.at("policy").get<PolicyParams>());
  f.checkpoint_id = j.at("checkpoint_id").get<int>();
  f.creation_update = j.at("creation_update").get<long>();
  f.greedy = j.value("greedy", false);
  return f;
}

}  // namespace maestro
