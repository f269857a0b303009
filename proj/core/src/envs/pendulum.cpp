#include "smoothrl/envs/pendulum.hpp"

#include "smoothrl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smoothrl::envs {

double normalize_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(theta + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  return wrapped - std::numbers::pi;
}

PendulumTransition pendulum_dynamics(const PendulumState& state, double action, const PendulumParams& p) {
  const double u = std::clamp(action, -p.max_torque, p.max_torque);
  const double th = normalize_angle(state.theta);
  const double cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

  const double applied = u * p.torque_gain;
  double theta_dot = state.theta_dot + (3.0 * p.gravity / (2.0 * p.length) * std::sin(state.theta) +
                                        3.0 / (p.mass * p.length * p.length) * applied) *
                                           p.dt;
  theta_dot = std::clamp(theta_dot, -p.max_speed, p.max_speed);
  return {{state.theta + theta_dot * p.dt, theta_dot}, -cost, u};
}

double pendulum_min_reward(const PendulumParams& p) {
  return -(std::numbers::pi * std::numbers::pi + 0.1 * p.max_speed * p.max_speed +
           0.001 * p.max_torque * p.max_torque);
}

Pendulum::Pendulum(std::uint64_t seed, PendulumParams params)
    : params_(params), rng_(make_stream(seed, "pendulum")) {}

std::vector<ObservationGroup> Pendulum::observation_groups() const {
  return {{"orientation", 0, 2}, {"angular_velocity", 2, 1}};
}

void Pendulum::seed(std::uint64_t seed) { rng_ = make_stream(seed, "pendulum"); }

std::vector<double> Pendulum::reset() {
  state_.theta = uniform(rng_, -std::numbers::pi, std::numbers::pi);
  state_.theta_dot = uniform(rng_, -1.0, 1.0);
  steps_ = 0;
  needs_reset_ = false;
  return observation();
}

void Pendulum::set_state(const PendulumState& state) {
  state_ = state;
  steps_ = 0;
  needs_reset_ = false;
}

std::vector<double> Pendulum::observation() const {
  return {std::cos(state_.theta), std::sin(state_.theta), state_.theta_dot};
}

StepResult Pendulum::step(std::span<const double> action) {
  if (action.size() != 1) throw InputError("pendulum: expected 1 action dimension, got " + std::to_string(action.size()));
  if (!std::isfinite(action[0])) throw InputError("pendulum: non-finite action at step " + std::to_string(steps_));
  if (needs_reset_) throw InputError("pendulum: step() after episode end without reset()");

  PendulumParams p = params_;
  p.mass *= mass_scale_;
  p.torque_gain *= torque_gain_;
  const auto tr = pendulum_dynamics(state_, action[0], p);
  state_ = tr.next;
  ++steps_;
  const bool done = steps_ >= kEpisodeLength;
  needs_reset_ = done;
  return {observation(), tr.reward, done, done};
}

void Pendulum::set_gain(std::string_view key, double value) {
  if (key != "torque_gain") throw ConfigError("pendulum has no gain '" + std::string(key) + "' (known: torque_gain)");
  torque_gain_ = value;
}

}  // namespace smoothrl::envs
