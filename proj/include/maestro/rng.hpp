#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace maestro {

// SplitMix64 finalizer. Used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Combines two values into a well-mixed seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Seeded generator passed explicitly by handle; there is no global random
// state anywhere in the library. Distributions are implemented here rather
// than with <random>'s distribution templates, whose output is
// implementation-defined, so traces are reproducible across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Samples an index with probability proportional to weights[i]. Weights must
  // be non-negative with a positive sum.
  std::size_t categorical(std::span<const double> weights);

  // Independent child stream; advances this generator by one draw.
  Rng split() { return Rng(engine_()); }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  // Textual engine state, for checkpoint/resume.
  std::string save_state() const;
  void load_state(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace maestro
