#include "smoothrl/bench/traces.hpp"

#include "smoothrl/bench/config.hpp"
#include "smoothrl/envs/trace_io.hpp"
#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/metrics/evaluate.hpp"

#include <json.hpp>

namespace smoothrl::bench {

TraceSummary write_traces(const policies::ActorCritic& policy, const std::string& env_name, int episodes,
                          std::uint64_t seed, const std::filesystem::path& dir, bool spectrum) {
  if (episodes <= 0) throw InputError("traces: episodes must be positive");
  auto env = envs::make_environment(env_name, make_stream(seed, "eval")());
  std::filesystem::create_directories(dir);
  TraceSummary s;
  nlohmann::json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["env"] = env_name;
  manifest["seed"] = seed;
  manifest["f_s"] = 1.0 / env->dt();
  manifest["episodes"] = nlohmann::json::array();
  for (int k = 0; k < episodes; ++k) {
    const auto r = metrics::run_episode(policy, *env);
    const std::string stem = "episode_" + std::to_string(k);
    envs::write_trace_csv(dir / (stem + ".csv"), r.actions, "action");
    if (spectrum) {
      metrics::write_spectrum_csv(dir / (stem + "_spectrum.csv"), metrics::smoothness(r.actions, 1.0 / env->dt()));
    }
    s.returns.push_back(r.episode_return);
    s.sms.push_back(r.sm);
    manifest["episodes"].push_back({{"file", stem + ".csv"}, {"return", r.episode_return}, {"sm", r.sm}});
  }
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return s;
}

}  // namespace smoothrl::bench
