#pragma once

#include "smoothrl/envs/environment.hpp"
#include "smoothrl/policies/actor_critic.hpp"

#include <vector>

namespace smoothrl::ppo {

using ad::Matrix;

/// Aligned per-step records from one rollout. Observations are the
/// normalized network inputs; `next_observations[t]` is the normalized
/// observation that followed step t (the terminal one when `dones[t]`).
struct Trajectory {
  Matrix observations;
  Matrix next_observations;
  Matrix actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  /// V of the final observation where an episode was truncated, 0 elsewhere.
  /// Empty means no truncated steps.
  std::vector<double> truncation_values;
  /// V of the observation after the last step, used when the rollout ends mid-episode.
  double bootstrap_value = 0.0;
  /// Returns of the episodes that finished inside this rollout.
  std::vector<double> episode_returns;

  std::size_t size() const { return rewards.size(); }
  /// Throws InputError when sequences disagree in length or log_probs are not finite.
  void validate() const;
};

/// Environment plus the partially finished episode carried between rollouts.
struct RolloutState {
  envs::Environment* env = nullptr;
  std::vector<double> raw_observation;
  double episode_return = 0.0;
  bool needs_reset = true;
};

/// Steps the environment `length` times with stochastic actions. When
/// `update_stats` is set, every raw observation is folded into the policy's
/// running statistics before it is normalized.
Trajectory collect_rollout(policies::ActorCritic& policy, RolloutState& state, int length, Rng& rng,
                           bool update_stats = true);

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// GAE(γ, λ) with δ_t = r_t + γV(s_{t+1})(1−done_t) − V(s_t); returns = A + V.
/// A truncated step bootstraps with its truncation value instead of 0.
/// Advantages are left unnormalized (normalization happens per minibatch).
Advantages compute_gae(const Trajectory& traj, double gamma, double lambda);

}  // namespace smoothrl::ppo
