#include "maestro/lasertag_domain.hpp"

#include "maestro/errors.hpp"

namespace maestro {

using namespace lasertag;

ObservationEncoding lasertag_encoding() { return {kViewSize * kViewSize, kNumCellCodes}; }

MatchOutcome play_match(const LaserTagParams& level, const PolicyParams& a, bool greedy_a, const PolicyParams& b,
                        bool greedy_b, std::uint64_t seed, int max_episode_steps) {
  Rng rng(seed);
  LaserTagState state = reset(level, max_episode_steps);
  MatchOutcome out;
  while (!state.done()) {
    const int action_a = act(a, observe(state, 0), rng, greedy_a).action;
    const int action_b = act(b, observe(state, 1), rng, greedy_b).action;
    StepResult r = step(state, {static_cast<Action>(action_a), static_cast<Action>(action_b)});
    out.returns[0] += r.rewards[0];
    out.returns[1] += r.rewards[1];
    state = std::move(r.state);
  }
  out.winner = state.winner.value_or(-1);
  out.length = state.step_counter;
  return out;
}

LaserTagDomain::LaserTagDomain(LaserTagDomainConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.generator.validate();
  cfg_.ppo.validate();
  if (cfg_.max_episode_steps < 1) throw ParameterError("max_episode_steps must be >= 1");
  if (cfg_.fixed_level) heldout_level(*cfg_.fixed_level);
  if (cfg_.representation == Representation::kTabular) {
    student_ = make_tabular_policy(kNumActions, lasertag_encoding());
  } else {
    Rng rng(mix_seed(cfg_.init_seed, 0x5eed));
    student_ = make_mlp_policy(kNumActions, lasertag_encoding(), cfg_.hidden, rng);
  }
}

EnvParams LaserTagDomain::generate(std::uint64_t seed) const {
  if (cfg_.fixed_level) return EnvParams{0, heldout_level(*cfg_.fixed_level)};
  return EnvParams{seed, lasertag::generate(seed, cfg_.generator)};
}

Episode LaserTagDomain::play(const EnvParams& env, const FrozenPolicy* coplayer, std::uint64_t seed) const {
  Rng rng(seed);
  LaserTagState state = reset(env.lasertag(), cfg_.max_episode_steps);
  const PolicyParams& other = coplayer ? *coplayer->params : student_;
  const bool other_greedy = coplayer ? coplayer->greedy : false;
  Episode ep;
  Trajectory& t = ep.trajectory;
  while (!state.done()) {
    Observation obs = observe(state, 0);
    const ActResult mine = act(student_, obs, rng);
    const ActResult theirs = act(other, observe(state, 1), rng, other_greedy);
    StepResult r = step(state, {static_cast<Action>(mine.action), static_cast<Action>(theirs.action)});
    t.push(std::move(obs), mine.action, r.rewards[0], mine.value, mine.log_prob, r.state.terminated);
    ep.undiscounted_return += r.rewards[0];
    state = std::move(r.state);
  }
  if (state.truncated) {
    t.truncated = true;
    t.bootstrap_value = evaluate(student_, observe(state, 0)).value;
  }
  t.finalize(cfg_.ppo.gae.gamma);
  ep.outcome = !state.winner ? 0.5 : (*state.winner == 0 ? 1.0 : 0.0);
  return ep;
}

bool LaserTagDomain::train(Episode episode, std::uint64_t update_seed) {
  pending_steps_ += static_cast<int>(episode.trajectory.size());
  pending_.push_back(std::move(episode.trajectory));
  if (pending_steps_ < cfg_.ppo.rollout_length) return false;
  Rng rng(update_seed);
  last_diag_ = ppo_update(student_, pending_, cfg_.ppo, adam_, rng);
  pending_.clear();
  pending_steps_ = 0;
  return true;
}

double LaserTagDomain::wall_density(const EnvParams& env) const { return env.lasertag().wall_density(); }

double LaserTagDomain::grid_size(const EnvParams& env) const {
  return 0.5 * (env.lasertag().width + env.lasertag().height);
}

nlohmann::json LaserTagDomain::save() const {
  return {{"student", student_}, {"adam", adam_}, {"pending", pending_}, {"pending_steps", pending_steps_}};
}

void LaserTagDomain::load(const nlohmann::json& j) {
  student_ = j.at("student").get<PolicyParams>();
  adam_ = j.at("adam").get<AdamState>();
  pending_ = j.at("pending").get<std::vector<Trajectory>>();
  pending_steps_ = j.at("pending_steps").get<int>();
}

}  // namespace maestro
