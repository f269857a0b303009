#include "smoothrl/envs/randomization.hpp"

#include "smoothrl/error.hpp"

#include <cmath>

namespace smoothrl::envs {

namespace {
double draw(Rng& rng, const Interval& range) {
  return range.low == range.high ? range.low : uniform(rng, range.low, range.high);
}

void check_interval(const std::string& what, const Interval& r) {
  if (!(r.low <= r.high) || !std::isfinite(r.low) || !std::isfinite(r.high)) {
    throw ConfigError(what + ": interval [" + std::to_string(r.low) + ", " + std::to_string(r.high) + "] is empty");
  }
}
}  // namespace

void DomainRandomizationConfig::validate() const {
  if (!(action_noise_std >= 0.0)) throw ConfigError("action_noise_std must be >= 0");
  check_interval("mass_scale_range", mass_scale_range);
  if (mass_scale_range.low <= 0.0) throw ConfigError("mass_scale_range must be positive");
  for (const auto& [group, std] : obs_noise_std) {
    if (!(std >= 0.0)) throw ConfigError("obs_noise_std." + group + " must be >= 0");
  }
  for (const auto& [key, range] : gain_ranges) check_interval("gain_ranges." + key, range);
}

DomainRandomizationConfig DomainRandomizationConfig::defaults_for(std::string_view env_name) {
  DomainRandomizationConfig c;
  if (env_name == "pendulum") {
    c.obs_noise_std = {{"orientation", 0.06}, {"angular_velocity", 0.3}};
  } else if (env_name == "reacher") {
    c.obs_noise_std = {{"position", 0.02}, {"linear_velocity", 0.25}, {"target", 0.0}};
  } else {
    throw ConfigError("no randomization defaults for environment '" + std::string(env_name) + "'");
  }
  return c;
}

DomainRandomizationConfig DomainRandomizationConfig::none() {
  DomainRandomizationConfig c;
  c.action_noise_std = 0.0;
  c.mass_scale_range = {1.0, 1.0};
  return c;
}

RandomizedEnvironment::RandomizedEnvironment(std::unique_ptr<Environment> inner, DomainRandomizationConfig config,
                                             Rng rng)
    : inner_(std::move(inner)), config_(std::move(config)), rng_(std::move(rng)) {
  config_.validate();
  const auto groups = inner_->observation_groups();
  for (const auto& [name, std] : config_.obs_noise_std) {
    bool known = false;
    for (const auto& g : groups) known = known || g.name == name;
    if (!known) throw ConfigError("environment " + std::string(inner_->name()) + " has no observation group '" + name + "'");
  }
}

std::vector<double> RandomizedEnvironment::reset() {
  inner_->set_mass_scale(draw(rng_, config_.mass_scale_range));
  for (const auto& [key, range] : config_.gain_ranges) inner_->set_gain(key, draw(rng_, range));
  auto obs = inner_->reset();
  add_observation_noise(obs);
  return obs;
}

StepResult RandomizedEnvironment::step(std::span<const double> action) {
  std::vector<double> executed(action.begin(), action.end());
  if (config_.action_noise_std > 0.0) {
    for (double& a : executed) a += config_.action_noise_std * normal(rng_);
  }
  auto result = inner_->step(executed);
  add_observation_noise(result.observation);
  return result;
}

void RandomizedEnvironment::add_observation_noise(std::vector<double>& obs) {
  for (const auto& g : inner_->observation_groups()) {
    auto it = config_.obs_noise_std.find(g.name);
    if (it == config_.obs_noise_std.end() || it->second == 0.0) continue;
    for (int i = 0; i < g.size; ++i) obs[static_cast<std::size_t>(g.offset + i)] += it->second * normal(rng_);
  }
}

std::unique_ptr<Environment> randomize(std::unique_ptr<Environment> env, const DomainRandomizationConfig& config,
                                       Rng rng) {
  return std::make_unique<RandomizedEnvironment>(std::move(env), config, std::move(rng));
}

}  // namespace smoothrl::envs
