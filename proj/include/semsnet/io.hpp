#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace semsnet {

/// Writes `text` to a sibling temporary file, then renames it over `path`.
/// Parent directories are created. Throws DataError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace semsnet
