#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace maestro {

// Whole-file read. Throws MissingArtifactError when the file does not exist
// and IoError on other failures.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames it over `path`, so readers
// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Truncates `path` to `size` bytes. Throws IoError if the file is shorter.
void truncate_file(const std::filesystem::path& path, std::uintmax_t size);

// Hex FNV-1a of the bytes.
std::string content_hash(std::string_view bytes);

// Regular files under `root`, relative, sorted.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& root);

}  // namespace maestro
