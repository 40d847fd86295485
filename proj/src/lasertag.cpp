#include "maestro/lasertag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "maestro/embedded_data.hpp"
#include "maestro/errors.hpp"
#include "maestro/rng.hpp"

namespace maestro::lasertag {

namespace {

constexpr std::array<std::array<int, 2>, 4> kFacingVectors = {{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

std::optional<Facing> facing_from_char(char c) {
  switch (c) {
    case '^': return Facing::kNorth;
    case '>': return Facing::kEast;
    case 'v': return Facing::kSouth;
    case '<': return Facing::kWest;
    default: return std::nullopt;
  }
}

bool same_cell(const Pose& a, int x, int y) { return a.x == x && a.y == y; }

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::array<int, 2> facing_vector(Facing f) { return kFacingVectors[static_cast<std::size_t>(f)]; }
Facing turn_left(Facing f) { return static_cast<Facing>((static_cast<int>(f) + 3) % 4); }
Facing turn_right(Facing f) { return static_cast<Facing>((static_cast<int>(f) + 1) % 4); }

char facing_char(Facing f) {
  static constexpr std::array<char, 4> kChars = {'^', '>', 'v', '<'};
  return kChars[static_cast<std::size_t>(f)];
}

int LaserTagParams::wall_count() const {
  return static_cast<int>(std::count_if(walls.begin(), walls.end(), [](std::uint8_t w) { return w != 0; }));
}

double LaserTagParams::wall_density() const {
  return static_cast<double>(wall_count()) / static_cast<double>(width * height);
}

void LaserTagParams::validate() const {
  if (width < kMinGridSize || width > kMaxGridSize || height < kMinGridSize || height > kMaxGridSize) {
    throw ParameterError("LaserTagParams: grid dimensions must lie in [5, 15]");
  }
  if (walls.size() != static_cast<std::size_t>(width * height)) {
    throw ParameterError("LaserTagParams: wall grid size mismatch");
  }
  for (const Pose& p : starts) {
    if (!in_bounds(p.x, p.y)) throw ParameterError("LaserTagParams: agent start out of bounds");
    if (is_wall(p.x, p.y)) throw ParameterError("LaserTagParams: agent starts on a wall");
  }
  if (starts[0].x == starts[1].x && starts[0].y == starts[1].y) {
    throw ParameterError("LaserTagParams: agent starts coincide");
  }
}

void GeneratorConfig::validate() const {
  if (min_size < kMinGridSize || max_size > kMaxGridSize || min_size > max_size) {
    throw ParameterError("GeneratorConfig: sizes must satisfy 5 <= min_size <= max_size <= 15");
  }
  if (!(max_wall_fraction >= 0.0 && max_wall_fraction <= 0.5)) {
    throw ParameterError("GeneratorConfig: max_wall_fraction must lie in [0, 0.5]");
  }
}

GeneratedLevel generate_detailed(std::uint64_t seed, const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  const int side = static_cast<int>(rng.uniform_int(cfg.min_size, cfg.max_size));
  const double fraction = rng.uniform() * cfg.max_wall_fraction;
  const int cells = side * side;
  const int num_walls = static_cast<int>(std::floor(fraction * cells));

  // Partial Fisher-Yates: the first num_walls entries become walls, the next
  // two become the agent starts.
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  const int picks = num_walls + 2;
  for (int i = 0; i < picks; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.uniform_index(static_cast<std::size_t>(cells - i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }

  GeneratedLevel out;
  out.sampled_wall_fraction = fraction;
  LaserTagParams& p = out.params;
  p.width = side;
  p.height = side;
  p.walls.assign(static_cast<std::size_t>(cells), 0);
  for (int i = 0; i < num_walls; ++i) p.walls[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  for (int agent = 0; agent < 2; ++agent) {
    const int cell = order[static_cast<std::size_t>(num_walls + agent)];
    p.starts[static_cast<std::size_t>(agent)] =
        Pose{cell % side, cell / side, static_cast<Facing>(rng.uniform_index(4))};
  }
  return out;
}

LaserTagParams generate(std::uint64_t seed, const GeneratorConfig& cfg) {
  return generate_detailed(seed, cfg).params;
}

LaserTagState reset(std::shared_ptr<const LaserTagParams> params, int max_episode_steps) {
  if (!params) throw ParameterError("reset: null level");
  if (max_episode_steps < 1) throw ParameterError("reset: max_episode_steps must be >= 1");
  params->validate();
  LaserTagState state;
  state.poses = params->starts;
  state.level = std::move(params);
  state.max_episode_steps = max_episode_steps;
  return state;
}

LaserTagState reset(const LaserTagParams& params, int max_episode_steps) {
  return reset(std::make_shared<const LaserTagParams>(params), max_episode_steps);
}

StepResult step(const LaserTagState& state, std::array<Action, 2> actions) {
  if (state.done()) throw UsageError("step: episode already finished");
  const LaserTagParams& level = *state.level;
  StepResult result;
  result.state = state;
  auto& poses = result.state.poses;

  for (int i = 0; i < 2; ++i) {
    if (actions[static_cast<std::size_t>(i)] == Action::kLeft) poses[static_cast<std::size_t>(i)].facing = turn_left(poses[static_cast<std::size_t>(i)].facing);
    if (actions[static_cast<std::size_t>(i)] == Action::kRight) poses[static_cast<std::size_t>(i)].facing = turn_right(poses[static_cast<std::size_t>(i)].facing);
  }

  std::array<std::array<int, 2>, 2> targets{};
  std::array<bool, 2> moving{false, false};
  for (std::size_t i = 0; i < 2; ++i) {
    targets[i] = {poses[i].x, poses[i].y};
    if (actions[i] != Action::kForward) continue;
    const auto d = facing_vector(poses[i].facing);
    const int tx = poses[i].x + d[0];
    const int ty = poses[i].y + d[1];
    // Entering the other agent's current cell is blocked, which also rules out swaps.
    if (level.blocked(tx, ty) || same_cell(poses[1 - i], tx, ty)) continue;
    targets[i] = {tx, ty};
    moving[i] = true;
  }
  if (moving[0] && moving[1] && targets[0] == targets[1]) moving = {false, false};
  for (std::size_t i = 0; i < 2; ++i) {
    if (moving[i]) {
      poses[i].x = targets[i][0];
      poses[i].y = targets[i][1];
    }
  }

  std::array<bool, 2> hit{false, false};
  for (std::size_t i = 0; i < 2; ++i) {
    if (actions[i] != Action::kShoot) continue;
    const auto d = facing_vector(poses[i].facing);
    int x = poses[i].x;
    int y = poses[i].y;
    while (true) {
      x += d[0];
      y += d[1];
      if (level.blocked(x, y)) break;
      if (same_cell(poses[1 - i], x, y)) {
        hit[i] = true;
        break;
      }
    }
  }

  result.state.step_counter += 1;
  if (hit[0] || hit[1]) {
    result.state.terminated = true;
    if (hit[0] != hit[1]) {
      const int shooter = hit[0] ? 0 : 1;
      result.state.winner = shooter;
      result.rewards[static_cast<std::size_t>(shooter)] = 1.0;
      result.rewards[static_cast<std::size_t>(1 - shooter)] = -1.0;
    }
  } else if (result.state.step_counter >= result.state.max_episode_steps) {
    result.state.truncated = true;
  }
  result.done = result.state.done();
  return result;
}

Observation observe(const LaserTagState& state, int agent) {
  if (agent != 0 && agent != 1) throw ParameterError("observe: agent must be 0 or 1");
  const LaserTagParams& level = *state.level;
  const Pose& self = state.poses[static_cast<std::size_t>(agent)];
  const Pose& other = state.poses[static_cast<std::size_t>(1 - agent)];
  const auto fwd = facing_vector(self.facing);
  const auto right = facing_vector(turn_right(self.facing));

  Observation obs(static_cast<std::size_t>(kViewSize * kViewSize));
  for (int row = 0; row < kViewSize; ++row) {
    const int ahead = kAnchorRow - row;
    for (int col = 0; col < kViewSize; ++col) {
      const int lateral = col - kAnchorCol;
      const int x = self.x + ahead * fwd[0] + lateral * right[0];
      const int y = self.y + ahead * fwd[1] + lateral * right[1];
      Cell code = Cell::kEmpty;
      if (ahead == 0 && lateral == 0) {
        code = Cell::kSelf;
      } else if (!level.in_bounds(x, y)) {
        code = Cell::kOutOfBounds;
      } else if (level.is_wall(x, y)) {
        code = Cell::kWall;
      } else if (same_cell(other, x, y)) {
        code = Cell::kOpponent;
      }
      obs[static_cast<std::size_t>(row * kViewSize + col)] = static_cast<std::uint8_t>(code);
    }
  }
  return obs;
}

std::string canonical_level_text(std::string_view text) {
  std::string out;
  for (std::string_view line : split_lines(text)) {
    line = rstrip(line);
    if (!line.empty() && line.front() == '%') continue;
    out.append(line);
    out.push_back('\n');
  }
  while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
  while (!out.empty() && out.front() == '\n') out.erase(out.begin());
  return out;
}

LaserTagParams load_level(std::string_view text) {
  const std::vector<std::string_view> lines = split_lines(text);
  std::size_t i = 0;
  auto skip_ignorable = [&]() {
    while (i < lines.size()) {
      const std::string_view line = rstrip(lines[i]);
      if (line.empty() || line.front() == '%') {
        ++i;
        continue;
      }
      break;
    }
  };

  skip_ignorable();
  if (i >= lines.size()) throw ParseError("missing 'WxH' header", 0, 0);
  const std::string_view header = rstrip(lines[i]);
  const std::size_t x_pos = header.find('x');
  int width = 0;
  int height = 0;
  try {
    if (x_pos == std::string_view::npos) throw std::invalid_argument("no x");
    std::size_t used_w = 0;
    std::size_t used_h = 0;
    width = std::stoi(std::string(header.substr(0, x_pos)), &used_w);
    height = std::stoi(std::string(header.substr(x_pos + 1)), &used_h);
    if (used_w != x_pos || used_h != header.size() - x_pos - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError("header must look like 'WxH'", i + 1, 1);
  }
  if (width < kMinGridSize || width > kMaxGridSize || height < kMinGridSize || height > kMaxGridSize) {
    throw ParseError("grid dimensions must lie in [5, 15]", i + 1, 1);
  }
  ++i;

  LaserTagParams params;
  params.width = width;
  params.height = height;
  params.walls.assign(static_cast<std::size_t>(width * height), 0);
  std::array<std::vector<std::pair<int, int>>, 2> markers;
  std::array<std::size_t, 2> marker_lines{};
  for (int y = 0; y < height; ++y, ++i) {
    if (i >= lines.size()) throw ParseError("expected " + std::to_string(height) + " grid rows", i + 1, 1);
    const std::string_view row = rstrip(lines[i]);
    if (static_cast<int>(row.size()) != width) {
      throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(width),
                       i + 1, std::min(row.size(), static_cast<std::size_t>(width)) + 1);
    }
    for (int x = 0; x < width; ++x) {
      const char c = row[static_cast<std::size_t>(x)];
      switch (c) {
        case '#': params.walls[static_cast<std::size_t>(y * width + x)] = 1; break;
        case '.': break;
        case 'A':
        case 'B': {
          const std::size_t agent = c == 'A' ? 0 : 1;
          markers[agent].emplace_back(x, y);
          marker_lines[agent] = i + 1;
          if (markers[agent].size() > 1) {
            throw ParseError(std::string("wrong agent count: more than one '") + c + "' marker", i + 1,
                             static_cast<std::size_t>(x) + 1);
          }
          break;
        }
        default:
          throw ParseError(std::string("unknown character '") + c + "'", i + 1, static_cast<std::size_t>(x) + 1);
      }
    }
  }
  for (std::size_t agent = 0; agent < 2; ++agent) {
    if (markers[agent].size() != 1) {
      throw ParseError(std::string("wrong agent count: missing '") + (agent == 0 ? 'A' : 'B') + "' marker", i, 1);
    }
  }

  std::array<std::optional<Facing>, 2> facings;
  skip_ignorable();
  while (i < lines.size()) {
    const std::string_view line = rstrip(lines[i]);
    if (line.size() != 2 || (line[0] != 'A' && line[0] != 'B')) {
      if (line.size() >= 1 && line[0] != 'A' && line[0] != 'B') {
        throw ParseError(std::string("unknown character '") + line[0] + "' in legend", i + 1, 1);
      }
      throw ParseError("legend lines must be an agent marker followed by a facing", i + 1, 1);
    }
    const std::size_t agent = line[0] == 'A' ? 0 : 1;
    const auto facing = facing_from_char(line[1]);
    if (!facing) throw ParseError(std::string("unknown facing '") + line[1] + "'", i + 1, 2);
    if (facings[agent]) throw ParseError("duplicate legend entry", i + 1, 1);
    facings[agent] = facing;
    ++i;
    skip_ignorable();
  }
  for (std::size_t agent = 0; agent < 2; ++agent) {
    if (!facings[agent]) {
      throw ParseError(std::string("missing legend line for '") + (agent == 0 ? 'A' : 'B') + "'",
                       marker_lines[agent], 1);
    }
    params.starts[agent] = Pose{markers[agent][0].first, markers[agent][0].second, *facings[agent]};
  }
  params.validate();
  return params;
}

std::string render_level(const LaserTagParams& params) {
  std::ostringstream out;
  out << params.width << 'x' << params.height << '\n';
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      char c = params.is_wall(x, y) ? '#' : '.';
      if (same_cell(params.starts[0], x, y)) c = 'A';
      if (same_cell(params.starts[1], x, y)) c = 'B';
      out << c;
    }
    out << '\n';
  }
  out << 'A' << facing_char(params.starts[0].facing) << '\n';
  out << 'B' << facing_char(params.starts[1].facing) << '\n';
  return out.str();
}

const std::vector<NamedLevel>& heldout_levels() {
  static const std::vector<NamedLevel> levels = [] {
    // Display order of the evaluation suite.
    static constexpr std::array<std::string_view, 13> kOrder = {
        "Cross", "FourRooms", "SixteenRooms", "Ruins", "Ruins2", "Star", "LargeCorridor",
        "Maze1", "Maze2", "Arena1", "Arena2", "Corridor1", "Corridor2"};
    std::vector<NamedLevel> out;
    for (std::string_view name : kOrder) {
      for (const auto& file : embedded::level_files()) {
        if (file.name == name) out.push_back(NamedLevel{file.name, load_level(file.content)});
      }
    }
    return out;
  }();
  return levels;
}

const LaserTagParams& heldout_level(std::string_view name) {
  for (const auto& level : heldout_levels()) {
    if (level.name == name) return level.params;
  }
  throw ParameterError("unknown held-out level '" + std::string(name) + "'");
}

UposgSpec uposg_spec(double gamma, int max_episode_steps) {
  UposgSpec spec;
  spec.num_actions = kNumActions;
  spec.observation_shape = {kViewSize, kViewSize};
  spec.gamma = gamma;
  spec.max_episode_steps = max_episode_steps;
  return spec;
}

}  // namespace maestro::lasertag
