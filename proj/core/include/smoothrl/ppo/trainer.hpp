#pragma once

#include "smoothrl/envs/randomization.hpp"
#include "smoothrl/ppo/adam.hpp"
#include "smoothrl/ppo/rollout.hpp"
#include "smoothrl/regularizers/method.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace smoothrl::ppo {

struct PpoConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 10;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double adam_epsilon = 1e-5;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int rollout_length = 2048;
  long total_steps = 150000;

  void validate() const;
  /// Budget for an environment: 150k steps on pendulum, 400k on reacher.
  static PpoConfig defaults_for(std::string_view env_name);
};

/// −mean(min(ratio·A, clip(ratio, 1−ε, 1+ε)·A)) over a B×1 batch.
ad::Tensor clipped_surrogate_loss(const ad::Tensor& ratio, const ad::Tensor& advantages, double clip_ratio);

/// Per-term means over the minibatches of one update.
struct LossStats {
  double total = 0.0;
  double rl = 0.0;
  double reg = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
};

struct UpdateContext {
  Adam* optimizer = nullptr;
  Rng* shuffle_rng = nullptr;
  Rng* reg_rng = nullptr;
  /// Where a minibatch is dumped when its loss turns non-finite; empty disables dumps.
  std::filesystem::path diagnostic_dir;
};

/// One PPO update: `epochs` passes over shuffled minibatches minimizing
/// L_clip + value_coef·L_V − entropy_coef·H + regularization(method).
LossStats ppo_update(policies::ActorCritic& policy, const Trajectory& traj, const Advantages& adv,
                     const PpoConfig& cfg, const regularizers::MethodSpec& method, UpdateContext& ctx);

struct CurveRow {
  long step = 0;
  double mean_episode_return = 0.0;
  double loss_total = 0.0;
  double loss_rl = 0.0;
  double loss_reg = 0.0;
};

/// `step,mean_episode_return,loss_total,loss_rl,loss_reg`
void write_training_curve(const std::filesystem::path& path, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_training_curve(const std::filesystem::path& path);

struct TrainSpec {
  std::string env;
  regularizers::MethodSpec method = regularizers::MethodSpec::parse("vanilla");
  PpoConfig ppo;
  std::optional<envs::DomainRandomizationConfig> randomization;
  std::uint64_t seed = 0;
  std::filesystem::path diagnostic_dir;
};

struct TrainResult {
  policies::ActorCritic policy;
  std::vector<CurveRow> curve;
  long steps = 0;
};

using ProgressFn = std::function<void(const CurveRow&)>;

/// Trains from scratch. All randomness derives from `spec.seed` through
/// independent streams (init, env, act, shuffle, reg, dr).
TrainResult train(const TrainSpec& spec, const ProgressFn& progress = {});

}  // namespace smoothrl::ppo
