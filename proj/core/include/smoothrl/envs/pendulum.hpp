#pragma once

#include "smoothrl/envs/environment.hpp"

namespace smoothrl::envs {

struct PendulumState {
  double theta = 0.0;  // 0 is upright
  double theta_dot = 0.0;
};

/// Constants of the public Pendulum-v1 task.
struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;
  double torque_gain = 1.0;
};

struct PendulumTransition {
  PendulumState next;
  double reward = 0.0;
  double torque = 0.0;  // after clipping
};

/// Wraps an angle to [-π, π).
double normalize_angle(double theta);

/// One semi-implicit Euler step:
///   θ̇' = clip(θ̇ + (3g/2l·sin θ + 3/(ml²)·u)·dt, ±max_speed),  θ' = θ + θ̇'·dt,
/// with u the torque clipped to ±max_torque and reward
/// −(wrap(θ)² + 0.1·θ̇² + 0.001·u²) evaluated on the pre-step state.
PendulumTransition pendulum_dynamics(const PendulumState& state, double action, const PendulumParams& params);

/// Worst possible per-step reward magnitude: π² + 0.1·8² + 0.001·2².
double pendulum_min_reward(const PendulumParams& params = {});

class Pendulum final : public Environment {
 public:
  static constexpr int kEpisodeLength = 200;

  explicit Pendulum(std::uint64_t seed = 0, PendulumParams params = {});

  std::string_view name() const override { return "pendulum"; }
  int observation_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int episode_length() const override { return kEpisodeLength; }
  double dt() const override { return params_.dt; }
  std::vector<ObservationGroup> observation_groups() const override;

  void seed(std::uint64_t seed) override;
  std::vector<double> reset() override;
  StepResult step(std::span<const double> action) override;
  int step_count() const override { return steps_; }

  void set_mass_scale(double scale) override { mass_scale_ = scale; }
  double mass_scale() const override { return mass_scale_; }
  void set_gain(std::string_view key, double value) override;

  const PendulumState& state() const { return state_; }
  /// Places the pendulum in a given state at step 0.
  void set_state(const PendulumState& state);
  std::vector<double> observation() const;

 private:
  PendulumParams params_;
  PendulumState state_;
  double mass_scale_ = 1.0;
  double torque_gain_ = 1.0;
  int steps_ = 0;
  bool needs_reset_ = true;
  Rng rng_;
};

}  // namespace smoothrl::envs
