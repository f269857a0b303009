#pragma once

#include "smoothrl/rng.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smoothrl::envs {

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  /// The episode hit its step limit rather than a terminal state.
  bool truncated = false;
};

/// Contiguous slice of the observation vector that shares a sensor-noise level.
struct ObservationGroup {
  std::string name;
  int offset = 0;
  int size = 0;
};

/// Episodic continuous-control task with a fixed horizon. An instance is
/// owned by a single worker. Episodes end only by reaching the horizon.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int episode_length() const = 0;
  /// Control period in seconds; the smoothness metric samples at 1/dt.
  virtual double dt() const = 0;
  virtual std::vector<ObservationGroup> observation_groups() const = 0;

  /// Reseeds the stream used for initial-state sampling.
  virtual void seed(std::uint64_t seed) = 0;
  virtual std::vector<double> reset() = 0;
  /// Throws InputError on a non-finite or wrongly sized action, or when
  /// called after the episode has ended without a reset.
  virtual StepResult step(std::span<const double> action) = 0;

  virtual int step_count() const = 0;

  /// Dynamics perturbation hooks used by domain randomization.
  virtual void set_mass_scale(double scale) = 0;
  virtual double mass_scale() const = 0;
  /// Env-specific multiplicative gains; unknown keys raise ConfigError.
  virtual void set_gain(std::string_view key, double value) = 0;
};

std::vector<std::string> environment_names();
/// "pendulum" or "reacher"; anything else raises ConfigError.
std::unique_ptr<Environment> make_environment(std::string_view name, std::uint64_t seed);

}  // namespace smoothrl::envs
