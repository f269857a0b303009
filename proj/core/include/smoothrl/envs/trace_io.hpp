#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace smoothrl::envs {

/// Writes one row per step: `step,<prefix>0,<prefix>1,...`. Action traces use
/// the prefix "dim"; observation traces use "obs".
void write_trace_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                     const std::string& column_prefix = "dim");

std::vector<std::vector<double>> read_trace_csv(const std::filesystem::path& path);

}  // namespace smoothrl::envs
