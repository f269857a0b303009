#include "smoothrl/metrics/evaluate.hpp"

#include "smoothrl/error.hpp"

#include <cmath>

namespace smoothrl::metrics {

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

EpisodeResult run_episode(const policies::ActorCritic& policy, envs::Environment& env) {
  if (env.observation_dim() != policy.spec().obs_dim || env.action_dim() != policy.spec().act_dim) {
    throw DimensionError("evaluate: policy expects obs/act dims " + std::to_string(policy.spec().obs_dim) + "/" +
                         std::to_string(policy.spec().act_dim) + " but " + std::string(env.name()) + " has " +
                         std::to_string(env.observation_dim()) + "/" + std::to_string(env.action_dim()));
  }
  EpisodeResult r;
  Rng unused(0);
  std::vector<double> obs = env.reset();
  for (bool done = false; !done;) {
    const auto act = policy.act(policy.normalize(obs), policies::ActMode::kDeterministic, unused);
    const auto step = env.step(act.action);
    r.actions.push_back(act.action);
    r.rewards.push_back(step.reward);
    obs = step.observation;
    done = step.done;
  }
  r.episode_return = cumulative_return(r.rewards);
  r.sm = smoothness(r.actions, 1.0 / env.dt()).sm;
  return r;
}

Evaluation evaluate(const policies::ActorCritic& policy, const std::string& env_name, int episodes,
                    std::uint64_t seed) {
  if (episodes <= 0) throw InputError("evaluate: episodes must be positive");
  auto env = envs::make_environment(env_name, make_stream(seed, "eval")());
  Evaluation e;
  e.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    const EpisodeResult r = run_episode(policy, *env);
    e.returns.push_back(r.episode_return);
    e.sms.push_back(r.sm);
  }
  std::tie(e.return_mean, e.return_std) = mean_std(e.returns);
  std::tie(e.sm_mean, e.sm_std) = mean_std(e.sms);
  return e;
}

}  // namespace smoothrl::metrics
