#pragma once

#include "smoothrl/policies/actor_critic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace smoothrl::bench {

struct TraceSummary {
  std::vector<double> returns;
  std::vector<double> sms;
};

/// Replays the first `episodes` evaluation episodes for `seed` and writes
/// `episode_<k>.csv` (step,action0,...), optionally `episode_<k>_spectrum.csv`,
/// and a `manifest.json` with per-episode return and Sm.
TraceSummary write_traces(const policies::ActorCritic& policy, const std::string& env_name, int episodes,
                          std::uint64_t seed, const std::filesystem::path& dir, bool spectrum);

}  // namespace smoothrl::bench
