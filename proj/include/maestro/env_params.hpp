#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "json.hpp"
#include "maestro/lasertag.hpp"

namespace maestro {

// θ for the matrix testbed: which game of the suite is played.
struct MatrixLevel {
  int game_index = 0;

  friend bool operator==(const MatrixLevel&, const MatrixLevel&) = default;
};

// One point of an environment's free-parameter space, plus the seed it was
// generated from (0 for hand-authored levels).
struct EnvParams {
  std::uint64_t seed = 0;
  std::variant<lasertag::LaserTagParams, MatrixLevel> payload;

  bool is_lasertag() const { return std::holds_alternative<lasertag::LaserTagParams>(payload); }
  const lasertag::LaserTagParams& lasertag() const { return std::get<lasertag::LaserTagParams>(payload); }
  const MatrixLevel& matrix() const { return std::get<MatrixLevel>(payload); }

  // Payload equality; the seed is provenance only.
  friend bool operator==(const EnvParams& a, const EnvParams& b) { return a.payload == b.payload; }
};

// Canonical serialization of the payload (seed excluded).
std::string canonical_payload(const EnvParams& params);

// 64-bit FNV-1a of canonical_payload. Equal payloads hash equally.
std::uint64_t env_hash(const EnvParams& params);

void to_json(nlohmann::json& j, const EnvParams& p);
void from_json(const nlohmann::json& j, EnvParams& p);

std::string serialize(const EnvParams& params);
EnvParams deserialize_env_params(const std::string& text);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace maestro
