#pragma once

#include "smoothrl/envs/environment.hpp"
#include "smoothrl/metrics/smoothness.hpp"
#include "smoothrl/policies/actor_critic.hpp"

#include <cstdint>
#include <string>

namespace smoothrl::metrics {

struct EpisodeResult {
  double episode_return = 0.0;
  double sm = 0.0;
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
};

struct Evaluation {
  int episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double sm_mean = 0.0;
  double sm_std = 0.0;
  std::vector<double> returns;
  std::vector<double> sms;
};

/// Runs one deterministic episode with frozen observation statistics.
EpisodeResult run_episode(const policies::ActorCritic& policy, envs::Environment& env);

/// Deterministic-mode evaluation over `episodes` episodes on a fresh env
/// seeded from `seed`. Standard deviations are sample (n−1) values, 0 for a
/// single episode.
Evaluation evaluate(const policies::ActorCritic& policy, const std::string& env_name, int episodes,
                    std::uint64_t seed);

/// Sample mean and (n−1) standard deviation; std is 0 for fewer than two values.
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace smoothrl::metrics
