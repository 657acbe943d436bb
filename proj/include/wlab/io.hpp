#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace wlab::io {

/// Shortest-exact decimal for CSV output: 17 significant digits.
std::string format_double(double v);

/// Writes contents to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace wlab::io
