#include "smoothrl/bench/records.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace smoothrl::bench {

using nlohmann::json;

void RunRecord::validate() const {
  if (status != "ok" && status != "failed") throw InputError("record: unknown status '" + status + "'");
  if (!ok()) return;
  if (episodes <= 0) throw InputError("record " + key().id() + ": episodes must be positive");
  if (!(return_std >= 0.0) || !(sm_std >= 0.0)) throw InputError("record " + key().id() + ": negative std");
}

std::string to_json_line(const RunRecord& r) {
  json j;
  j["format_version"] = r.format_version;
  j["status"] = r.status;
  j["env"] = r.env;
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["hash"] = r.hash;
  j["steps"] = r.steps;
  if (r.ok()) {
    j["episodes"] = r.episodes;
    j["return_mean"] = r.return_mean;
    j["return_std"] = r.return_std;
    j["sm_mean"] = r.sm_mean;
    j["sm_std"] = r.sm_std;
    j["returns"] = r.returns;
    j["sms"] = r.sms;
    j["curve_path"] = r.curve_path;
    j["checkpoint_path"] = r.checkpoint_path;
    j["checkpoint_hash"] = r.checkpoint_hash;
    j["train_seconds"] = r.train_seconds;
  } else {
    j["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
  }
  return j.dump() + "\n";
}

RunRecord parse_record(const std::string& line) {
  RunRecord r;
  try {
    const json j = json::parse(line);
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != kFormatVersion) {
      throw IoError("record: unsupported format_version " + std::to_string(r.format_version));
    }
    r.status = j.at("status").get<std::string>();
    r.env = j.at("env").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.hash = j.at("hash").get<std::string>();
    r.steps = j.at("steps").get<long>();
    if (r.ok()) {
      r.episodes = j.at("episodes").get<int>();
      r.return_mean = j.at("return_mean").get<double>();
      r.return_std = j.at("return_std").get<double>();
      r.sm_mean = j.at("sm_mean").get<double>();
      r.sm_std = j.at("sm_std").get<double>();
      r.returns = j.at("returns").get<std::vector<double>>();
      r.sms = j.at("sms").get<std::vector<double>>();
      r.curve_path = j.at("curve_path").get<std::string>();
      r.checkpoint_path = j.at("checkpoint_path").get<std::string>();
      r.checkpoint_hash = j.at("checkpoint_hash").get<std::string>();
      r.train_seconds = j.at("train_seconds").get<double>();
    } else {
      r.error_kind = j.at("error").at("kind").get<std::string>();
      r.error_message = j.at("error").at("message").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("record: ") + e.what());
  }
  try {
    r.validate();
  } catch (const InputError& e) {
    throw IoError(e.what());
  }
  return r;
}

std::filesystem::path record_path(const std::filesystem::path& out_dir, const RunKey& key) {
  return out_dir / "runs" / (key.id() + ".jsonl");
}

void write_record(const std::filesystem::path& out_dir, const RunRecord& record) {
  write_file_atomic(record_path(out_dir, record.key()), to_json_line(record));
}

std::optional<RunRecord> read_record(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const std::string text = read_file(path);
  try {
    return parse_record(text);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<RunRecord> load_records(const std::filesystem::path& out_dir) {
  const auto dir = out_dir / "runs";
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) out.push_back(*read_record(f));
  return out;
}

}  // namespace smoothrl::bench
