#include "maestro/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maestro/errors.hpp"

namespace maestro {

ReplayEntry make_entry(EnvParams params, double score, long now) {
  ReplayEntry e;
  e.env_hash = env_hash(params);
  e.params = std::move(params);
  e.score = score;
  e.last_sampled_at = now;
  e.insert_at = now;
  return e;
}

EnvBuffer::EnvBuffer(int capacity, int owner) : capacity_(capacity), owner_(owner) {
  if (capacity < 1) throw ParameterError("EnvBuffer: capacity must be positive");
}

int EnvBuffer::find(const EnvParams& params) const {
  const auto it = index_.find(env_hash(params));
  if (it == index_.end()) return -1;
  for (std::size_t i : it->second) {
    if (entries_[i].params == params) return static_cast<int>(i);
  }
  return -1;
}

std::size_t EnvBuffer::min_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const auto& b = entries_[best];
    if (e.score < b.score || (e.score == b.score && e.insert_at < b.insert_at)) best = i;
  }
  return best;
}

EnvBuffer::InsertOutcome EnvBuffer::insert(ReplayEntry entry) {
  if (!std::isfinite(entry.score)) throw ParameterError("EnvBuffer::insert: non-finite score");
  const int existing = find(entry.params);
  if (existing >= 0) {
    ReplayEntry& e = entries_[static_cast<std::size_t>(existing)];
    e.score = entry.score;
    e.last_sampled_at = entry.last_sampled_at;
    e.insert_at = entry.insert_at;
    return InsertOutcome::kUpdated;
  }
  if (entries_.size() < static_cast<std::size_t>(capacity_)) {
    index_[entry.env_hash].push_back(entries_.size());
    entries_.push_back(std::move(entry));
    return InsertOutcome::kAppended;
  }
  const std::size_t victim = min_index();
  if (!(entry.score > entries_[victim].score)) return InsertOutcome::kRejected;
  auto& slots = index_[entries_[victim].env_hash];
  slots.erase(std::find(slots.begin(), slots.end(), victim));
  if (slots.empty()) index_.erase(entries_[victim].env_hash);
  index_[entry.env_hash].push_back(victim);
  entries_[victim] = std::move(entry);
  return InsertOutcome::kReplaced;
}

double EnvBuffer::max_score() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) best = std::max(best, e.score);
  return best;
}

double EnvBuffer::min_score() const {
  if (entries_.empty()) return std::numeric_limits<double>::infinity();
  return entries_[min_index()].score;
}

void EnvBuffer::mark_sampled(std::size_t i, long now) { entries_.at(i).last_sampled_at = now; }

void to_json(nlohmann::json& j, const EnvBuffer& b) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : b.entries_) {
    entries.push_back({{"params", e.params},
                       {"score", e.score},
                       {"last_sampled_at", e.last_sampled_at},
                       {"insert_at", e.insert_at}});
  }
  j = {{"capacity", b.capacity_}, {"owner", b.owner_}, {"entries", entries}};
}

EnvBuffer EnvBuffer::from_json(const nlohmann::json& j) {
  EnvBuffer b(j.at("capacity").get<int>(), j.at("owner").get<int>());
  for (const auto& item : j.at("entries")) {
    ReplayEntry e;
    e.params = item.at("params").get<EnvParams>();
    e.env_hash = env_hash(e.params);
    e.score = item.at("score").get<double>();
    e.last_sampled_at = item.at("last_sampled_at").get<long>();
    e.insert_at = item.at("insert_at").get<long>();
    b.index_[e.env_hash].push_back(b.entries_.size());
    b.entries_.push_back(std::move(e));
  }
  return b;
}

void ReplayDistributionConfig::validate() const {
  if (!(replay_probability >= 0.0 && replay_probability <= 1.0)) {
    throw ParameterError("replay_probability must lie in [0, 1]");
  }
  if (!(staleness_coef >= 0.0 && staleness_coef <= 1.0)) throw ParameterError("staleness_coef must lie in [0, 1]");
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
}

std::vector<double> replay_distribution(const EnvBuffer& buffer, const ReplayDistributionConfig& cfg, long now) {
  cfg.validate();
  if (buffer.empty()) throw ParameterError("replay_distribution: empty buffer");
  const auto& entries = buffer.entries();
  const std::size_t n = entries.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].score != entries[b].score) return entries[a].score > entries[b].score;
    return entries[a].insert_at < entries[b].insert_at;
  });
  std::vector<double> score_p(n);
  double score_total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double w = std::pow(static_cast<double>(r + 1), -1.0 / cfg.temperature);
    score_p[order[r]] = w;
    score_total += w;
  }

  std::vector<double> stale_p(n);
  double stale_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stale_p[i] = static_cast<double>(std::max(0L, now - entries[i].last_sampled_at));
    stale_total += stale_p[i];
  }

  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double stale = stale_total > 0.0 ? stale_p[i] / stale_total : 1.0 / static_cast<double>(n);
    p[i] = (1.0 - cfg.staleness_coef) * score_p[i] / score_total + cfg.staleness_coef * stale;
  }
  return p;
}

void MaestroConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  if (checkpoint_interval < 1) throw ParameterError("checkpoint_interval must be positive");
  if (member_capacity < 1) throw ParameterError("member_capacity must be positive");
}

void WinHistory::push(double outcome) {
  outcomes_.push_back(outcome);
  while (outcomes_.size() > capacity_) outcomes_.pop_front();
}

double WinHistory::win_rate() const {
  if (outcomes_.empty()) return 0.5;
  return std::accumulate(outcomes_.begin(), outcomes_.end(), 0.0) / static_cast<double>(outcomes_.size());
}

void Population::add(FrozenPolicy member, int per_member_capacity, std::size_t win_window) {
  const int id = member.checkpoint_id;
  members.push_back(std::move(member));
  win_history.emplace_back(win_window);
  if (per_member_capacity > 0) buffers.emplace_back(per_member_capacity, id);
}

std::vector<double> Population::win_rates() const {
  std::vector<double> rates;
  rates.reserve(win_history.size());
  for (const auto& h : win_history) rates.push_back(h.win_rate());
  return rates;
}

std::vector<double> coplayer_distribution(const Population& pop, double lambda) {
  const std::size_t n = pop.size();
  if (n == 0) throw ParameterError("coplayer_distribution: empty population");
  if (pop.buffers.size() != n) throw ParameterError("coplayer_distribution: buffers not aligned with members");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  // Members are appended in checkpoint order, so the first maximum has the
  // lowest checkpoint id.
  std::size_t h = 0;
  double best = pop.buffers[0].max_score();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = pop.buffers[i].max_score();
    if (m > best) {
      best = m;
      h = i;
    }
  }
  const double nd = static_cast<double>(n);
  std::vector<double> p(n, lambda / nd);
  p[h] = (nd - lambda * (nd - 1.0)) / nd;
  return p;
}

int select_coplayer(const Population& pop, const MaestroConfig& cfg, Rng& rng) {
  return static_cast<int>(rng.categorical(coplayer_distribution(pop, cfg.lambda)));
}

std::vector<double> uniform_coplayer_distribution(std::size_t n) {
  if (n == 0) throw ParameterError("empty population");
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

int select_coplayer_random(const Population& pop, Rng& rng) {
  if (pop.size() == 0) throw ParameterError("select_coplayer_random: empty population");
  return static_cast<int>(rng.uniform_index(pop.size()));
}

int select_coplayer_fsp(const Population& pop, Rng& rng) {
  if (pop.size() == 0) throw ParameterError("select_coplayer_fsp: empty population");
  return static_cast<int>(rng.uniform_index(pop.size()));
}

std::vector<double> pfsp_distribution(const std::vector<double>& win_rates, double power, double smoothing) {
  if (win_rates.empty()) throw ParameterError("pfsp_distribution: empty population");
  if (power < 0.0 || smoothing < 0.0) throw ParameterError("pfsp_distribution: power and smoothing must be >= 0");
  std::vector<double> w(win_rates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::pow(1.0 - std::clamp(win_rates[i], 0.0, 1.0), power) + smoothing;
    total += w[i];
  }
  if (total <= 0.0) return uniform_coplayer_distribution(w.size());
  for (double& x : w) x /= total;
  return w;
}

int select_coplayer_pfsp(const Population& pop, double power, double smoothing, Rng& rng) {
  return static_cast<int>(rng.categorical(pfsp_distribution(pop.win_rates(), power, smoothing)));
}

}  // namespace maestro
