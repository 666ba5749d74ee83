#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace edlab {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace edlab
