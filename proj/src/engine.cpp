#include "maestro/engine.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

enum Stream : std::uint64_t { kDecide = 1, kGenerate = 2, kPlay = 3, kUpdate = 4 };

std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return mix_seed(mix_seed(seed, stream), index);
}

struct MethodInfo {
  Method method;
  const char* name;
  EnvCurriculum env;
  CoplayerSampler coplayer;
};

constexpr MethodInfo kMethods[] = {
    {Method::kMaestro, "maestro", EnvCurriculum::kMaestro, CoplayerSampler::kRegret},
    {Method::kMaestroR, "maestro-r", EnvCurriculum::kMaestro, CoplayerSampler::kUniform},
    {Method::kMaestroP, "maestro-p", EnvCurriculum::kMaestro, CoplayerSampler::kPfsp},
    {Method::kDrSp, "dr_sp", EnvCurriculum::kDomainRandomization, CoplayerSampler::kSelfPlay},
    {Method::kDrFsp, "dr_fsp", EnvCurriculum::kDomainRandomization, CoplayerSampler::kFsp},
    {Method::kDrPfsp, "dr_pfsp", EnvCurriculum::kDomainRandomization, CoplayerSampler::kPfsp},
    {Method::kPlrSp, "plr_sp", EnvCurriculum::kPlr, CoplayerSampler::kSelfPlay},
    {Method::kPlrFsp, "plr_fsp", EnvCurriculum::kPlr, CoplayerSampler::kFsp},
    {Method::kPlrPfsp, "plr_pfsp", EnvCurriculum::kPlr, CoplayerSampler::kPfsp},
};

const MethodInfo& info(Method m) {
  for (const auto& i : kMethods) {
    if (i.method == m) return i;
  }
  throw ParameterError("unknown method");
}

}  // namespace

const char* method_name(Method m) { return info(m).name; }

Method parse_method(const std::string& name) {
  for (const auto& i : kMethods) {
    if (name == i.name) return i.method;
  }
  throw ParameterError("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& i : kMethods) out.push_back(i.method);
    return out;
  }();
  return methods;
}

EnvCurriculum env_curriculum(Method m) { return info(m).env; }
CoplayerSampler coplayer_sampler(Method m) { return info(m).coplayer; }

void EngineConfig::validate() const {
  replay.validate();
  maestro.validate();
  if (plr_capacity < 1) throw ParameterError("plr_capacity must be positive");
  if (pfsp_power < 0.0 || pfsp_smoothing < 0.0) throw ParameterError("pfsp parameters must be >= 0");
  if (win_window < 1) throw ParameterError("win_window must be positive");
  if (num_workers < 1) throw ParameterError("num_workers must be positive");
  if (budget_updates < 0) throw ParameterError("budget_updates must be >= 0");
  if (max_iterations < 1) throw ParameterError("max_iterations must be positive");
}

nlohmann::json to_json(const EventRecord& r) {
  nlohmann::json j = {{"iteration", r.iteration},
                      {"branch", r.branch},
                      {"fallback", r.fallback},
                      {"coplayer_id", r.coplayer_id},
                      {"env_seed", r.env_seed},
                      {"env_hash", hex64(r.env_hash)},
                      {"score", r.score},
                      {"trained", r.trained},
                      {"updated", r.updated},
                      {"buffer_sizes", r.buffer_sizes},
                      {"update", r.update},
                      {"episode_return", r.episode_return},
                      {"outcome", r.outcome},
                      {"length", r.length},
                      {"wall_density", r.wall_density},
                      {"grid_size", r.grid_size},
                      {"population_size", r.population_size}};
  if (r.new_member >= 0) j["new_member"] = r.new_member;
  return j;
}

EventRecord event_from_json(const nlohmann::json& j) {
  EventRecord r;
  r.iteration = j.at("iteration").get<long>();
  r.branch = j.at("branch").get<std::string>();
  r.fallback = j.at("fallback").get<bool>();
  r.coplayer_id = j.at("coplayer_id").get<int>();
  r.env_seed = j.at("env_seed").get<std::uint64_t>();
  r.env_hash = std::stoull(j.at("env_hash").get<std::string>(), nullptr, 16);
  r.score = j.at("score").get<double>();
  r.trained = j.at("trained").get<bool>();
  r.updated = j.at("updated").get<bool>();
  r.buffer_sizes = j.at("buffer_sizes").get<std::vector<int>>();
  r.update = j.at("update").get<long>();
  r.episode_return = j.at("episode_return").get<double>();
  r.outcome = j.at("outcome").get<double>();
  r.length = j.at("length").get<int>();
  r.wall_density = j.at("wall_density").get<double>();
  r.grid_size = j.at("grid_size").get<double>();
  r.population_size = j.at("population_size").get<int>();
  r.new_member = j.value("new_member", -1);
  return r;
}

CurriculumEngine::CurriculumEngine(EngineConfig cfg, TrainingDomain& domain) : cfg_(std::move(cfg)), domain_(domain) {
  cfg_.validate();
  if (env_curriculum(cfg_.method) == EnvCurriculum::kPlr) shared_buffer_.emplace(cfg_.plr_capacity, -1);
  if (uses_population()) {
    const int capacity = env_curriculum(cfg_.method) == EnvCurriculum::kMaestro ? cfg_.maestro.member_capacity : 0;
    population_.add(freeze(domain_.student_snapshot(), 0, 0), capacity, static_cast<std::size_t>(cfg_.win_window));
  }
}

bool CurriculumEngine::uses_population() const { return coplayer_sampler(cfg_.method) != CoplayerSampler::kSelfPlay; }

bool CurriculumEngine::finished() const {
  return updates_ >= cfg_.budget_updates || iterations_ >= cfg_.max_iterations;
}

EnvBuffer* CurriculumEngine::buffer_for(int coplayer) {
  switch (env_curriculum(cfg_.method)) {
    case EnvCurriculum::kDomainRandomization: return nullptr;
    case EnvCurriculum::kPlr: return &*shared_buffer_;
    case EnvCurriculum::kMaestro: return &population_.buffers.at(static_cast<std::size_t>(coplayer));
  }
  return nullptr;
}

CurriculumEngine::Decision CurriculumEngine::decide(long iteration) {
  Rng rng(derive(cfg_.seed, kDecide, static_cast<std::uint64_t>(iteration)));
  Decision d;
  d.iteration = iteration;
  d.play_seed = derive(cfg_.seed, kPlay, static_cast<std::uint64_t>(iteration));
  switch (coplayer_sampler(cfg_.method)) {
    case CoplayerSampler::kSelfPlay: d.coplayer = select_coplayer_sp(); break;
    case CoplayerSampler::kFsp: d.coplayer = select_coplayer_fsp(population_, rng); break;
    case CoplayerSampler::kUniform: d.coplayer = select_coplayer_random(population_, rng); break;
    case CoplayerSampler::kPfsp:
      d.coplayer = select_coplayer_pfsp(population_, cfg_.pfsp_power, cfg_.pfsp_smoothing, rng);
      break;
    case CoplayerSampler::kRegret: d.coplayer = select_coplayer(population_, cfg_.maestro, rng); break;
  }

  const EnvBuffer* buffer = buffer_for(d.coplayer);
  if (buffer) {
    d.replay = rng.bernoulli(cfg_.replay.replay_probability);
    if (d.replay && buffer->empty()) {
      d.replay = false;
      d.fallback = true;
    }
  }
  if (d.replay) {
    const std::vector<double> p = replay_distribution(*buffer, cfg_.replay, iteration);
    d.env = buffer->at(rng.categorical(p)).params;
  } else {
    d.env = domain_.generate(derive(cfg_.seed, kGenerate, static_cast<std::uint64_t>(iteration)));
  }
  return d;
}

EventRecord CurriculumEngine::apply(const Decision& d, Episode episode) {
  const EnvCurriculum curriculum = env_curriculum(cfg_.method);
  const bool trained = curriculum == EnvCurriculum::kDomainRandomization || d.replay;
  const std::uint64_t hash = env_hash(d.env);

  double score = 0.0;
  switch (cfg_.maestro.estimator) {
    case Estimator::kMaxMc: {
      // PLR's shared buffer sees every co-player, so its maxima are per environment.
      const int key_owner = curriculum == EnvCurriculum::kMaestro
                                ? population_.members.at(static_cast<std::size_t>(d.coplayer)).checkpoint_id
                                : -1;
      const double r_max = registry_.update({hash, key_owner}, episode.trajectory.episode_return);
      score = score_maxmc(episode.trajectory, r_max).value;
      break;
    }
    case Estimator::kPvl: score = score_pvl(episode.trajectory, domain_.gae()).value; break;
    case Estimator::kExact:
      if (!episode.exact_regret) throw ConfigError("maestro.estimator", "domain provides no exact regret");
      score = *episode.exact_regret;
      break;
  }

  EventRecord rec;
  rec.iteration = d.iteration;
  rec.branch = d.replay ? "replay" : "new";
  rec.fallback = d.fallback;
  rec.coplayer_id = d.coplayer == kSelfPlay
                        ? kSelfPlay
                        : population_.members.at(static_cast<std::size_t>(d.coplayer)).checkpoint_id;
  rec.env_seed = d.env.seed;
  rec.env_hash = hash;
  rec.score = score;
  rec.trained = trained;
  rec.episode_return = episode.trajectory.episode_return;
  rec.outcome = episode.outcome;
  rec.length = static_cast<int>(episode.trajectory.size());
  rec.wall_density = domain_.wall_density(d.env);
  rec.grid_size = domain_.grid_size(d.env);

  if (d.coplayer != kSelfPlay) population_.win_history.at(static_cast<std::size_t>(d.coplayer)).push(episode.outcome);

  if (trained) {
    const std::uint64_t update_seed = derive(cfg_.seed, kUpdate, static_cast<std::uint64_t>(updates_));
    if (domain_.train(std::move(episode), update_seed)) {
      rec.updated = true;
      ++updates_;
      if (uses_population() && updates_ % cfg_.maestro.checkpoint_interval == 0) {
        const int id = static_cast<int>(population_.size());
        const int capacity = curriculum == EnvCurriculum::kMaestro ? cfg_.maestro.member_capacity : 0;
        population_.add(freeze(domain_.student_snapshot(), id, updates_), capacity,
                        static_cast<std::size_t>(cfg_.win_window));
        rec.new_member = id;
      }
    }
  }

  if (EnvBuffer* buffer = buffer_for(d.coplayer)) buffer->insert(make_entry(d.env, score, d.iteration));

  rec.update = updates_;
  rec.population_size = static_cast<int>(population_.size());
  if (shared_buffer_) rec.buffer_sizes.push_back(static_cast<int>(shared_buffer_->size()));
  for (const auto& b : population_.buffers) rec.buffer_sizes.push_back(static_cast<int>(b.size()));
  return rec;
}

std::vector<EventRecord> CurriculumEngine::run_round() {
  std::vector<Decision> decisions;
  for (int w = 0; w < cfg_.num_workers && iterations_ + w < cfg_.max_iterations; ++w) {
    decisions.push_back(decide(iterations_ + w));
  }
  std::vector<Episode> episodes(decisions.size());
  auto collect = [&](std::size_t i) {
    const Decision& d = decisions[i];
    const FrozenPolicy* co =
        d.coplayer == kSelfPlay ? nullptr : &population_.members.at(static_cast<std::size_t>(d.coplayer));
    episodes[i] = domain_.play(d.env, co, d.play_seed);
  };
  if (decisions.size() > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          collect(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else if (!decisions.empty()) {
    collect(0);
  }

  std::vector<EventRecord> records;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    // A policy update earlier in the round ends the round's trained episodes
    // on-policy only up to that point; remaining episodes are still applied.
    records.push_back(apply(decisions[i], std::move(episodes[i])));
    ++iterations_;
    if (finished()) break;
  }
  return records;
}

nlohmann::json CurriculumEngine::save_state() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : population_.members) members.push_back(checkpoint_json(m));
  nlohmann::json buffers = nlohmann::json::array();
  for (const auto& b : population_.buffers) buffers.push_back(b);
  nlohmann::json wins = nlohmann::json::array();
  for (const auto& h : population_.win_history) {
    wins.push_back(std::vector<double>(h.outcomes().begin(), h.outcomes().end()));
  }
  nlohmann::json j = {{"iterations", iterations_},
                      {"updates", updates_},
                      {"members", members},
                      {"buffers", buffers},
                      {"win_history", wins},
                      {"registry", registry_},
                      {"domain", domain_.save()}};
  if (shared_buffer_) j["shared_buffer"] = *shared_buffer_;
  return j;
}

void CurriculumEngine::load_state(const nlohmann::json& j) {
  iterations_ = j.at("iterations").get<long>();
  updates_ = j.at("updates").get<long>();
  population_ = Population{};
  for (const auto& m : j.at("members")) population_.members.push_back(frozen_from_json(m));
  for (const auto& b : j.at("buffers")) population_.buffers.push_back(EnvBuffer::from_json(b));
  for (const auto& h : j.at("win_history")) {
    WinHistory history(static_cast<std::size_t>(cfg_.win_window));
    for (double o : h.get<std::vector<double>>()) history.push(o);
    population_.win_history.push_back(std::move(history));
  }
  registry_ = j.at("registry").get<MaxReturnRegistry>();
  if (j.contains("shared_buffer")) {
    shared_buffer_ = EnvBuffer::from_json(j.at("shared_buffer"));
  } else {
    shared_buffer_.reset();
  }
  domain_.load(j.at("domain"));
}

}  // namespace maestro
