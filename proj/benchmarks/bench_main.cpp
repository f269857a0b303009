#include "smoothrl/autodiff/ops.hpp"
#include "smoothrl/envs/environment.hpp"
#include "smoothrl/metrics/smoothness.hpp"
#include "smoothrl/ppo/trainer.hpp"
#include "smoothrl/regularizers/losses.hpp"

#include <benchmark/benchmark.h>

using namespace smoothrl;
using ad::Matrix;
using ad::Tensor;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

policies::ActorCritic make_policy(const std::string& method) {
  return policies::ActorCritic::create(regularizers::MethodSpec::parse(method).policy_spec(3, 1), 0);
}

}  // namespace

static void BM_MatmulBackward(benchmark::State& state) {
  const auto n = state.range(0);
  Rng rng(1);
  const Matrix a = random_matrix(rng, 64, n), b = random_matrix(rng, n, n);
  for (auto _ : state) {
    ad::Tape tape;
    const Tensor x = tape.variable(a), w = tape.variable(b);
    const auto g = ad::grad(ad::sum(ad::tanh(ad::matmul(x, w))), {x, w});
    benchmark::DoNotOptimize(g[1].value().data());
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(16)->Arg(64);

static void BM_ActorForward(benchmark::State& state, const std::string& method, bool tape) {
  auto policy = make_policy(method);
  Rng rng(2);
  const Matrix obs = random_matrix(rng, 64, 3);
  for (auto _ : state) {
    if (tape) {
      ad::Tape t;
      const auto p = policies::Bound::on(t, policy.params());
      benchmark::DoNotOptimize(policy.actor(p, Tensor(obs)).mean.value().data());
    } else {
      benchmark::DoNotOptimize(policy.mean(obs).data());
    }
  }
}
BENCHMARK_CAPTURE(BM_ActorForward, plain_evaluate, std::string("vanilla"), false);
BENCHMARK_CAPTURE(BM_ActorForward, plain_tape, std::string("vanilla"), true);
BENCHMARK_CAPTURE(BM_ActorForward, lipsnet_evaluate, std::string("lipsnet"), false);
BENCHMARK_CAPTURE(BM_ActorForward, lipsnet_tape, std::string("lipsnet"), true);

static void BM_CapsLossGradient(benchmark::State& state) {
  auto policy = make_policy("lipsnet+caps");
  Rng rng(3);
  const Matrix s = random_matrix(rng, 64, 3), s_next = random_matrix(rng, 64, 3);
  regularizers::CapsConfig cfg;
  for (auto _ : state) {
    ad::Tape t;
    const auto p = policies::Bound::on(t, policy.params());
    auto pi = [&](const Tensor& x) { return policy.actor(p, x).mean; };
    const Tensor loss = regularizers::caps_loss(pi, Tensor(s), Tensor(s_next), cfg, rng);
    benchmark::DoNotOptimize(ad::grad(loss, std::span<const Tensor>(p.tensors)).size());
  }
}
BENCHMARK(BM_CapsLossGradient);

static void BM_PpoUpdate(benchmark::State& state, const std::string& method) {
  auto policy = make_policy(method);
  auto env = envs::make_environment("pendulum", 1);
  ppo::RolloutState rs{env.get(), {}, 0.0, true};
  Rng act(1), shuffle(2), reg(3);
  const auto traj = ppo::collect_rollout(policy, rs, 256, act);
  const auto adv = ppo::compute_gae(traj, 0.99, 0.95);
  ppo::PpoConfig cfg;
  cfg.epochs = 1;
  const auto spec = regularizers::MethodSpec::parse(method);
  ppo::Adam opt(policy.params(), cfg.learning_rate, 0.9, 0.999, cfg.adam_epsilon);
  ppo::UpdateContext ctx{&opt, &shuffle, &reg, {}};
  for (auto _ : state) benchmark::DoNotOptimize(ppo::ppo_update(policy, traj, adv, cfg, spec, ctx).total);
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK_CAPTURE(BM_PpoUpdate, vanilla, std::string("vanilla"));
BENCHMARK_CAPTURE(BM_PpoUpdate, lipsnet_caps, std::string("lipsnet+caps"));

static void BM_Rollout(benchmark::State& state) {
  auto policy = make_policy("vanilla");
  auto env = envs::make_environment("pendulum", 1);
  ppo::RolloutState rs{env.get(), {}, 0.0, true};
  Rng act(1);
  for (auto _ : state) benchmark::DoNotOptimize(ppo::collect_rollout(policy, rs, 200, act).size());
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_Rollout);

static void BM_Smoothness(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::smoothness(x, 20.0).sm);
}
BENCHMARK(BM_Smoothness)->Arg(150)->Arg(200)->Arg(4096);
BENCHMARK_MAIN();
