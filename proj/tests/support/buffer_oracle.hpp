#pragma once

// Reference models shared by the unit and acceptance tests.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "maestro/curriculum.hpp"
#include "maestro/rng.hpp"

namespace maestro::testing {

inline EnvParams matrix_env(int index) {
  EnvParams p;
  p.seed = static_cast<std::uint64_t>(index);
  p.payload = MatrixLevel{index};
  return p;
}

// Top-K retention written as a plain list: find by key, append, or evict the
// lowest (score, insert_at) when strictly beaten.
struct OracleBuffer {
  struct Item {
    int key;
    double score;
    long insert_at;
  };
  std::size_t capacity;
  std::vector<Item> items;

  void insert(int key, double score, long now) {
    for (auto& it : items) {
      if (it.key == key) {
        it.score = score;
        it.insert_at = now;
        return;
      }
    }
    if (items.size() < capacity) {
      items.push_back({key, score, now});
      return;
    }
    auto victim = std::min_element(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return a.score < b.score || (a.score == b.score && a.insert_at < b.insert_at);
    });
    if (score > victim->score) *victim = {key, score, now};
  }
};

inline std::map<int, double> contents(const EnvBuffer& b) {
  std::map<int, double> out;
  for (const auto& e : b.entries()) out[e.params.matrix().game_index] = e.score;
  return out;
}

inline std::map<int, double> contents(const OracleBuffer& b) {
  std::map<int, double> out;
  for (const auto& it : b.items) out[it.key] = it.score;
  return out;
}

struct FuzzReport {
  long operations = 0;
  long mismatches = 0;
  long capacity_violations = 0;
  long min_decreases = 0;
  long isolation_violations = 0;
  std::string first_failure;

  bool ok() const { return mismatches == 0 && capacity_violations == 0 && min_decreases == 0 && isolation_violations == 0; }
};

// Interleaves inserts over several buffers and compares every buffer against
// its oracle after each operation. Untouched buffers must not change.
inline FuzzReport fuzz_buffers(long operations, std::uint64_t seed, int num_buffers = 4) {
  Rng rng(seed);
  std::vector<EnvBuffer> buffers;
  std::vector<OracleBuffer> oracles;
  for (int i = 0; i < num_buffers; ++i) {
    const int cap = 1 + static_cast<int>(rng.uniform_index(16));
    buffers.emplace_back(cap, i);
    oracles.push_back({static_cast<std::size_t>(cap), {}});
  }
  std::vector<std::map<int, double>> snapshot(static_cast<std::size_t>(num_buffers));
  FuzzReport r;
  for (long op = 0; op < operations; ++op) {
    const std::size_t b = rng.uniform_index(static_cast<std::size_t>(num_buffers));
    const int key = static_cast<int>(rng.uniform_index(48));
    // Coarse scores so ties are common.
    const double score = static_cast<double>(rng.uniform_index(20)) / 4.0 - 1.0;
    const bool was_full = buffers[b].size() == static_cast<std::size_t>(buffers[b].capacity());
    const double before_min = buffers[b].min_score();
    buffers[b].insert(make_entry(matrix_env(key), score, op));
    oracles[b].insert(key, score, op);
    ++r.operations;

    const auto got = contents(buffers[b]);
    if (got != contents(oracles[b])) {
      if (r.mismatches++ == 0) r.first_failure = "contents differ at op " + std::to_string(op);
    }
    if (buffers[b].size() > static_cast<std::size_t>(buffers[b].capacity())) ++r.capacity_violations;
    // Re-scoring an existing entry may lower the minimum; fresh inserts may not.
    const bool fresh = snapshot[b].count(key) == 0;
    if (was_full && fresh && buffers[b].min_score() < before_min) ++r.min_decreases;
    for (std::size_t other = 0; other < buffers.size(); ++other) {
      if (other != b && contents(buffers[other]) != snapshot[other]) ++r.isolation_violations;
    }
    snapshot[b] = got;
  }
  return r;
}

}  // namespace maestro::testing
