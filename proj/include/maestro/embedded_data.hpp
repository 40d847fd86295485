#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace maestro::embedded {

struct TextFile {
  std::string name;
  std::string content;
};

// Bundled held-out LaserTag levels, sorted by file name.
const std::vector<TextFile>& level_files();

// The illustrative regret matrix over co-players x environments.
std::string_view table1_fixture();

}  // namespace maestro::embedded
