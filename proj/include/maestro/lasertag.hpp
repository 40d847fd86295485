#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maestro/uposg.hpp"

namespace maestro::lasertag {

enum class Facing : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };
enum class Action : std::uint8_t { kLeft = 0, kRight = 1, kForward = 2, kShoot = 3, kNoop = 4 };
enum class Cell : std::uint8_t { kEmpty = 0, kWall = 1, kSelf = 2, kOpponent = 3, kOutOfBounds = 4 };

inline constexpr int kNumActions = 5;
inline constexpr int kNumCellCodes = 5;
inline constexpr int kViewSize = 5;
// The observing agent sits at the bottom-centre cell of its view.
inline constexpr int kAnchorRow = kViewSize - 1;
inline constexpr int kAnchorCol = kViewSize / 2;
inline constexpr int kMinGridSize = 5;
inline constexpr int kMaxGridSize = 15;
inline constexpr int kDefaultMaxEpisodeSteps = 256;

struct Pose {
  int x = 0;
  int y = 0;
  Facing facing = Facing::kNorth;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// The free parameters of one LaserTag level. Cells outside the grid are
// implicit walls. Row-major, y grows downwards, north is -y.
struct LaserTagParams {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;
  std::array<Pose, 2> starts{};

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool is_wall(int x, int y) const { return walls[static_cast<std::size_t>(y * width + x)] != 0; }
  // Out-of-bounds cells count as blocked.
  bool blocked(int x, int y) const { return !in_bounds(x, y) || is_wall(x, y); }
  int wall_count() const;
  double wall_density() const;

  void validate() const;

  friend bool operator==(const LaserTagParams&, const LaserTagParams&) = default;
};

struct GeneratorConfig {
  int min_size = kMinGridSize;
  int max_size = kMaxGridSize;
  double max_wall_fraction = 0.5;

  void validate() const;
};

struct GeneratedLevel {
  LaserTagParams params;
  // The wall fraction drawn before rounding the wall count down.
  double sampled_wall_fraction = 0.0;
};

// Square grid side uniform on [min_size, max_size], wall fraction uniform on
// [0, max_wall_fraction], floor(fraction * cells) walls placed uniformly, then
// two distinct free start cells with uniform facings.
GeneratedLevel generate_detailed(std::uint64_t seed, const GeneratorConfig& cfg = {});
LaserTagParams generate(std::uint64_t seed, const GeneratorConfig& cfg = {});

struct LaserTagState {
  std::shared_ptr<const LaserTagParams> level;
  std::array<Pose, 2> poses{};
  int step_counter = 0;
  int max_episode_steps = kDefaultMaxEpisodeSteps;
  bool terminated = false;  // a tag happened
  bool truncated = false;   // the step limit was reached with both agents alive
  std::optional<int> winner;

  bool done() const { return terminated || truncated; }
};

LaserTagState reset(const LaserTagParams& params, int max_episode_steps = kDefaultMaxEpisodeSteps);
LaserTagState reset(std::shared_ptr<const LaserTagParams> params,
                    int max_episode_steps = kDefaultMaxEpisodeSteps);

struct StepResult {
  LaserTagState state;
  std::array<double, 2> rewards{};
  bool done = false;
};

// Simultaneous move. Phase order: rotations, movement (conflicts resolve to
// both-stay), then shots along the post-move facings.
StepResult step(const LaserTagState& state, std::array<Action, 2> actions);

// Egocentric 5x5 view, forward is up. Row-major codes, see Cell.
Observation observe(const LaserTagState& state, int agent);

// ASCII level format; see docs/level_format.md.
LaserTagParams load_level(std::string_view text);
std::string render_level(const LaserTagParams& params);
// Drops comment lines, trailing whitespace and CR characters.
std::string canonical_level_text(std::string_view text);

struct NamedLevel {
  std::string name;
  LaserTagParams params;
};

// The 13 hand-authored evaluation levels bundled with the library.
const std::vector<NamedLevel>& heldout_levels();
const LaserTagParams& heldout_level(std::string_view name);

std::array<int, 2> facing_vector(Facing f);
Facing turn_left(Facing f);
Facing turn_right(Facing f);
char facing_char(Facing f);

UposgSpec uposg_spec(double gamma, int max_episode_steps);

}  // namespace maestro::lasertag
