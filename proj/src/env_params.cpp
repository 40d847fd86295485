#include "maestro/env_params.hpp"

#include <cstdio>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

constexpr int kEnvParamsVersion = 1;

nlohmann::json payload_json(const EnvParams& p) {
  if (p.is_lasertag()) {
    const auto& l = p.lasertag();
    std::string walls(l.walls.size(), '0');
    for (std::size_t i = 0; i < l.walls.size(); ++i) walls[i] = l.walls[i] ? '1' : '0';
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& s : l.starts) starts.push_back({s.x, s.y, static_cast<int>(s.facing)});
    return {{"kind", "lasertag"}, {"width", l.width}, {"height", l.height}, {"walls", walls}, {"starts", starts}};
  }
  return {{"kind", "matrix"}, {"game_index", p.matrix().game_index}};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string canonical_payload(const EnvParams& params) { return payload_json(params).dump(); }

std::uint64_t env_hash(const EnvParams& params) { return fnv1a64(canonical_payload(params)); }

void to_json(nlohmann::json& j, const EnvParams& p) {
  j = {{"version", kEnvParamsVersion}, {"seed", p.seed}, {"payload", payload_json(p)}};
}

void from_json(const nlohmann::json& j, EnvParams& p) {
  if (j.at("version").get<int>() != kEnvParamsVersion) {
    throw ParameterError("EnvParams: unsupported serialization version");
  }
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto& payload = j.at("payload");
  const std::string kind = payload.at("kind").get<std::string>();
  if (kind == "lasertag") {
    lasertag::LaserTagParams l;
    l.width = payload.at("width").get<int>();
    l.height = payload.at("height").get<int>();
    const std::string walls = payload.at("walls").get<std::string>();
    l.walls.resize(walls.size());
    for (std::size_t i = 0; i < walls.size(); ++i) l.walls[i] = walls[i] == '1' ? 1 : 0;
    const auto& starts = payload.at("starts");
    if (starts.size() != 2) throw ParameterError("EnvParams: expected two agent starts");
    for (std::size_t i = 0; i < 2; ++i) {
      const int facing = starts[i].at(2).get<int>();
      if (facing < 0 || facing > 3) throw ParameterError("EnvParams: bad facing");
      l.starts[i] = {starts[i].at(0).get<int>(), starts[i].at(1).get<int>(),
                     static_cast<lasertag::Facing>(facing)};
    }
    l.validate();
    p.payload = std::move(l);
  } else if (kind == "matrix") {
    p.payload = MatrixLevel{payload.at("game_index").get<int>()};
  } else {
    throw ParameterError("EnvParams: unknown payload kind '" + kind + "'");
  }
}

std::string serialize(const EnvParams& params) { return nlohmann::json(params).dump(); }

EnvParams deserialize_env_params(const std::string& text) {
  return nlohmann::json::parse(text).get<EnvParams>();
}

}  // namespace maestro
