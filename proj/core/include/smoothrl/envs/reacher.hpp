#pragma once

#include "smoothrl/envs/environment.hpp"

#include <array>

namespace smoothrl::envs {

/// Planar point mass that must reach a target resampled every episode.
struct ReacherState {
  std::array<double, 2> position{};
  std::array<double, 2> velocity{};
  std::array<double, 2> target{};
};

struct ReacherParams {
  double dt = 0.05;
  double damping = 0.95;
  double mass = 1.0;
  double max_force = 1.0;
  double arena = 1.0;      // |position| per axis
  double max_speed = 2.0;  // |velocity| per axis
  double force_gain = 1.0;
};

struct ReacherTransition {
  ReacherState next;
  double reward = 0.0;
};

/// v' = damping·v + dt·a/m,  p' = p + dt·v', both clipped per axis; a is the
/// force clipped to ±max_force. Reward −‖p − target‖ − 0.001‖a‖² uses the
/// pre-step position.
ReacherTransition reacher_dynamics(const ReacherState& state, std::span<const double> action,
                                   const ReacherParams& params);

class Reacher final : public Environment {
 public:
  static constexpr int kEpisodeLength = 150;

  explicit Reacher(std::uint64_t seed = 0, ReacherParams params = {});

  std::string_view name() const override { return "reacher"; }
  int observation_dim() const override { return 6; }
  int action_dim() const override { return 2; }
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

  const ReacherState& state() const { return state_; }
  void set_state(const ReacherState& state);
  std::vector<double> observation() const;

 private:
  ReacherParams params_;
  ReacherState state_;
  double mass_scale_ = 1.0;
  double force_gain_ = 1.0;
  int steps_ = 0;
  bool needs_reset_ = true;
  Rng rng_;
};

}  // namespace smoothrl::envs
