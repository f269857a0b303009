#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace smoothrl {

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
/// Readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

std::uint64_t fnv1a(std::string_view data);
std::string fnv1a_hex(std::string_view data);

}  // namespace smoothrl
