#include "smoothrl/ppo/rollout.hpp"

#include "smoothrl/error.hpp"

#include <cmath>

namespace smoothrl::ppo {

void Trajectory::validate() const {
  const std::size_t n = rewards.size();
  if (dones.size() != n || values.size() != n || log_probs.size() != n ||
      static_cast<std::size_t>(observations.rows()) != n || static_cast<std::size_t>(actions.rows()) != n ||
      static_cast<std::size_t>(next_observations.rows()) != n ||
      (!truncation_values.empty() && truncation_values.size() != n)) {
    throw InputError("trajectory: sequences have different lengths");
  }
  for (double lp : log_probs) {
    if (!std::isfinite(lp)) throw InputError("trajectory: non-finite log_prob");
  }
}

Trajectory collect_rollout(policies::ActorCritic& policy, RolloutState& state, int length, Rng& rng,
                           bool update_stats) {
  if (state.env == nullptr) throw InputError("collect_rollout: no environment");
  envs::Environment& env = *state.env;
  const int obs_dim = env.observation_dim(), act_dim = env.action_dim();
  Trajectory t;
  t.observations.resize(length, obs_dim);
  t.next_observations.resize(length, obs_dim);
  t.actions.resize(length, act_dim);
  t.rewards.reserve(static_cast<std::size_t>(length));

  auto observe = [&](const std::vector<double>& raw) {
    if (update_stats) policy.update_obs_stats(raw);
    return policy.normalize(raw);
  };

  std::vector<double> obs;
  if (!state.needs_reset) obs = policy.normalize(state.raw_observation);
  for (int step = 0; step < length; ++step) {
    if (state.needs_reset) {
      state.raw_observation = env.reset();
      state.episode_return = 0.0;
      state.needs_reset = false;
      obs = observe(state.raw_observation);
    }
    const auto act = policy.act(obs, policies::ActMode::kStochastic, rng);
    envs::StepResult r;
    try {
      r = env.step(act.action);
    } catch (const Error& e) {
      throw Error(e.kind(), "rollout step " + std::to_string(step) + ": " + e.what());
    }
    const std::vector<double> next = observe(r.observation);
    for (int j = 0; j < obs_dim; ++j) {
      t.observations(step, j) = obs[static_cast<std::size_t>(j)];
      t.next_observations(step, j) = next[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < act_dim; ++j) t.actions(step, j) = act.action[static_cast<std::size_t>(j)];
    t.rewards.push_back(r.reward);
    t.dones.push_back(r.done);
    t.values.push_back(act.value);
    t.log_probs.push_back(act.log_prob);
    double truncation_value = 0.0;
    if (r.truncated) {
      const Matrix row = Eigen::Map<const Matrix>(next.data(), 1, obs_dim);
      truncation_value = policy.value(row)(0, 0);
    }
    t.truncation_values.push_back(truncation_value);
    state.episode_return += r.reward;
    state.raw_observation = r.observation;
    obs = next;
    if (r.done) {
      t.episode_returns.push_back(state.episode_return);
      state.needs_reset = true;
    }
  }
  if (!state.needs_reset) {
    const Matrix row = Eigen::Map<const Matrix>(obs.data(), 1, obs_dim);
    t.bootstrap_value = policy.value(row)(0, 0);
  }
  return t;
}

Advantages compute_gae(const Trajectory& traj, double gamma, double lambda) {
  const std::size_t n = traj.size();
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = i + 1 < n ? traj.values[i + 1] : traj.bootstrap_value;
    const double not_done = traj.dones[i] ? 0.0 : 1.0;
    const double cut = traj.truncation_values.empty() ? 0.0 : traj.truncation_values[i];
    const double delta = traj.rewards[i] + gamma * (next_value * not_done + cut) - traj.values[i];
    running = delta + gamma * lambda * not_done * running;
    out.advantages[i] = running;
    out.returns[i] = running + traj.values[i];
  }
  return out;
}

}  // namespace smoothrl::ppo
