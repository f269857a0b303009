#pragma once

#include "smoothrl/bench/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace smoothrl::bench {

/// One finished (or failed) training + evaluation run, stored as a single
/// JSON line in `<out>/runs/<id>.jsonl`.
struct RunRecord {
  int format_version = kFormatVersion;
  std::string status = "ok";  // "ok" | "failed"
  std::string env;
  std::string method;
  std::uint64_t seed = 0;
  std::string hash;
  long steps = 0;
  int episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double sm_mean = 0.0;
  double sm_std = 0.0;
  std::vector<double> returns;
  std::vector<double> sms;
  /// Relative to the output directory.
  std::string curve_path;
  std::string checkpoint_path;
  std::string checkpoint_hash;
  double train_seconds = 0.0;
  std::string error_kind;
  std::string error_message;

  bool ok() const { return status == "ok"; }
  RunKey key() const { return {env, method, seed}; }

  /// Throws InputError when episodes <= 0 or a std is negative on an ok record.
  void validate() const;
};

std::string to_json_line(const RunRecord& record);
RunRecord parse_record(const std::string& line);

std::filesystem::path record_path(const std::filesystem::path& out_dir, const RunKey& key);
void write_record(const std::filesystem::path& out_dir, const RunRecord& record);
std::optional<RunRecord> read_record(const std::filesystem::path& path);

/// All records under `<out>/runs`, sorted by file name. Unreadable files raise IoError.
std::vector<RunRecord> load_records(const std::filesystem::path& out_dir);

}  // namespace smoothrl::bench
