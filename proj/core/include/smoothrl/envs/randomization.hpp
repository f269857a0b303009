#pragma once

#include "smoothrl/envs/environment.hpp"

#include <map>
#include <memory>
#include <string>

namespace smoothrl::envs {

struct Interval {
  double low = 1.0;
  double high = 1.0;
};

/// Training-time perturbations: additive Gaussian action noise, per-episode
/// mass scaling, additive Gaussian sensor noise per observation group, and
/// optional env-specific gain ranges (see Environment::set_gain).
struct DomainRandomizationConfig {
  double action_noise_std = 0.02;
  Interval mass_scale_range{0.95, 1.05};
  std::map<std::string, double> obs_noise_std;
  std::map<std::string, Interval> gain_ranges;

  /// Throws ConfigError for empty intervals or negative noise levels.
  void validate() const;

  /// Defaults with sensor-noise levels mapped onto the env's observation groups.
  static DomainRandomizationConfig defaults_for(std::string_view env_name);
  /// Every knob neutral: no noise, unit mass scale.
  static DomainRandomizationConfig none();
};

/// Environment decorator applying a DomainRandomizationConfig. Noise is drawn
/// from its own stream, so the wrapped env's initial states are unaffected.
class RandomizedEnvironment final : public Environment {
 public:
  RandomizedEnvironment(std::unique_ptr<Environment> inner, DomainRandomizationConfig config, Rng rng);

  std::string_view name() const override { return inner_->name(); }
  int observation_dim() const override { return inner_->observation_dim(); }
  int action_dim() const override { return inner_->action_dim(); }
  int episode_length() const override { return inner_->episode_length(); }
  double dt() const override { return inner_->dt(); }
  std::vector<ObservationGroup> observation_groups() const override { return inner_->observation_groups(); }

  void seed(std::uint64_t seed) override { inner_->seed(seed); }
  std::vector<double> reset() override;
  StepResult step(std::span<const double> action) override;
  int step_count() const override { return inner_->step_count(); }

  void set_mass_scale(double scale) override { inner_->set_mass_scale(scale); }
  double mass_scale() const override { return inner_->mass_scale(); }
  void set_gain(std::string_view key, double value) override { inner_->set_gain(key, value); }

  const Environment& inner() const { return *inner_; }

 private:
  void add_observation_noise(std::vector<double>& obs);

  std::unique_ptr<Environment> inner_;
  DomainRandomizationConfig config_;
  Rng rng_;
};

std::unique_ptr<Environment> randomize(std::unique_ptr<Environment> env, const DomainRandomizationConfig& config,
                                       Rng rng);

}  // namespace smoothrl::envs
