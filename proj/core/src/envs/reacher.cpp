#include "smoothrl/envs/reacher.hpp"

#include "smoothrl/error.hpp"

#include <algorithm>
#include <cmath>

namespace smoothrl::envs {

ReacherTransition reacher_dynamics(const ReacherState& s, std::span<const double> action, const ReacherParams& p) {
  ReacherTransition tr;
  tr.next.target = s.target;
  double effort = 0.0, dist2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double a = std::clamp(action[static_cast<std::size_t>(i)], -p.max_force, p.max_force);
    effort += a * a;
    const double d = s.position[i] - s.target[i];
    dist2 += d * d;
    const double v = std::clamp(p.damping * s.velocity[i] + p.dt * a * p.force_gain / p.mass, -p.max_speed, p.max_speed);
    tr.next.velocity[i] = v;
    tr.next.position[i] = std::clamp(s.position[i] + p.dt * v, -p.arena, p.arena);
  }
  tr.reward = -std::sqrt(dist2) - 0.001 * effort;
  return tr;
}

Reacher::Reacher(std::uint64_t seed, ReacherParams params) : params_(params), rng_(make_stream(seed, "reacher")) {}

std::vector<ObservationGroup> Reacher::observation_groups() const {
  return {{"position", 0, 2}, {"linear_velocity", 2, 2}, {"target", 4, 2}};
}

void Reacher::seed(std::uint64_t seed) { rng_ = make_stream(seed, "reacher"); }

std::vector<double> Reacher::reset() {
  for (int i = 0; i < 2; ++i) state_.position[i] = uniform(rng_, -0.5, 0.5);
  state_.velocity = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) state_.target[i] = uniform(rng_, -0.8, 0.8);
  steps_ = 0;
  needs_reset_ = false;
  return observation();
}

void Reacher::set_state(const ReacherState& state) {
  state_ = state;
  steps_ = 0;
  needs_reset_ = false;
}

std::vector<double> Reacher::observation() const {
  return {state_.position[0], state_.position[1], state_.velocity[0],
          state_.velocity[1], state_.target[0],   state_.target[1]};
}

StepResult Reacher::step(std::span<const double> action) {
  if (action.size() != 2) throw InputError("reacher: expected 2 action dimensions, got " + std::to_string(action.size()));
  for (double a : action) {
    if (!std::isfinite(a)) throw InputError("reacher: non-finite action at step " + std::to_string(steps_));
  }
  if (needs_reset_) throw InputError("reacher: step() after episode end without reset()");

  ReacherParams p = params_;
  p.mass *= mass_scale_;
  p.force_gain *= force_gain_;
  const auto tr = reacher_dynamics(state_, action, p);
  state_ = tr.next;
  ++steps_;
  const bool done = steps_ >= kEpisodeLength;
  needs_reset_ = done;
  return {observation(), tr.reward, done, done};
}

void Reacher::set_gain(std::string_view key, double value) {
  if (key != "force_gain") throw ConfigError("reacher has no gain '" + std::string(key) + "' (known: force_gain)");
  force_gain_ = value;
}

}  // namespace smoothrl::envs
