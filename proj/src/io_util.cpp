#include "maestro/io_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "maestro/env_params.hpp"
#include "maestro/errors.hpp"

namespace maestro {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifactError("missing file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void truncate_file(const fs::path& path, std::uintmax_t size) {
  std::error_code ec;
  const std::uintmax_t current = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  if (current < size) throw IoError(path.string() + " is shorter than the saved offset");
  fs::resize_file(path, size, ec);
  if (ec) throw IoError("cannot truncate " + path.string() + ": " + ec.message());
}

std::string content_hash(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

std::vector<fs::path> list_files(const fs::path& root) {
  std::vector<fs::path> files;
  if (!fs::exists(root)) return files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace maestro
