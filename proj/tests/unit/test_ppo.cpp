#include <doctest.h>

#include "smoothrl/autodiff/ops.hpp"
#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/ppo/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

using namespace smoothrl;
using ad::Matrix;
using ad::Tensor;

namespace {

ppo::Trajectory synthetic(std::size_t n, Rng& rng, double done_prob) {
  ppo::Trajectory t;
  t.observations = Matrix::Zero(static_cast<Eigen::Index>(n), 1);
  t.next_observations = t.observations;
  t.actions = t.observations;
  for (std::size_t i = 0; i < n; ++i) {
    t.rewards.push_back(normal(rng));
    t.values.push_back(normal(rng));
    t.dones.push_back(uniform01(rng) < done_prob);
    t.truncation_values.push_back(t.dones.back() && uniform01(rng) < 0.5 ? normal(rng) : 0.0);
    t.log_probs.push_back(0.0);
  }
  t.bootstrap_value = normal(rng);
  return t;
}

// A_t = Σ_k (γλ)^k δ_{t+k}, cut after the first episode end. A truncated end
// bootstraps with its truncation value.
std::vector<double> gae_oracle(const ppo::Trajectory& t, double gamma, double lambda) {
  const std::size_t n = t.size();
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? t.values[i + 1] : t.bootstrap_value;
    const double tail = t.dones[i] ? t.truncation_values[i] : next;
    delta[i] = t.rewards[i] + gamma * tail - t.values[i];
  }
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    for (std::size_t k = i; k < n; ++k) {
      a[i] += w * delta[k];
      if (t.dones[k]) break;
      w *= gamma * lambda;
    }
  }
  return a;
}

policies::ActorCritic pendulum_policy(const std::string& method, std::uint64_t seed) {
  auto env = envs::make_environment("pendulum", 1);
  return policies::ActorCritic::create(
      regularizers::MethodSpec::parse(method).policy_spec(env->observation_dim(), env->action_dim()), seed);
}

ppo::TrainSpec small_run(const std::string& method, std::uint64_t seed) {
  ppo::TrainSpec s;
  s.env = "pendulum";
  s.method = regularizers::MethodSpec::parse(method);
  s.seed = seed;
  s.ppo.rollout_length = 256;
  s.ppo.total_steps = 512;
  s.ppo.epochs = 2;
  return s;
}

class FaultyEnv : public envs::Environment {
 public:
  std::string_view name() const override { return "faulty"; }
  int observation_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int episode_length() const override { return 200; }
  double dt() const override { return 0.05; }
  std::vector<envs::ObservationGroup> observation_groups() const override { return {{"all", 0, 3}}; }
  void seed(std::uint64_t) override {}
  std::vector<double> reset() override {
    steps_ = 0;
    return {1.0, 0.0, 0.0};
  }
  envs::StepResult step(std::span<const double>) override {
    if (++steps_ == 4) throw NumericError("simulator diverged");
    return {{1.0, 0.0, 0.0}, -1.0, false};
  }
  int step_count() const override { return steps_; }
  void set_mass_scale(double) override {}
  double mass_scale() const override { return 1.0; }
  void set_gain(std::string_view, double) override {}

 private:
  int steps_ = 0;
};

}  // namespace

TEST_CASE("gae single step with zero values gives the reward") {
  ppo::Trajectory t;
  t.observations = t.next_observations = t.actions = Matrix::Zero(1, 1);
  t.rewards = {1.0};
  t.values = {0.0};
  t.dones = {true};
  t.log_probs = {0.0};
  const auto adv = ppo::compute_gae(t, 0.99, 0.95);
  CHECK(adv.advantages[0] == 1.0);
  CHECK(adv.returns[0] == 1.0);

  t.truncation_values = {2.0};
  CHECK(ppo::compute_gae(t, 0.99, 0.95).advantages[0] == doctest::Approx(2.98).epsilon(1e-15));
}

TEST_CASE("gae of zero rewards and zero values is zero") {
  Rng rng(3);
  ppo::Trajectory t = synthetic(50, rng, 0.1);
  std::fill(t.rewards.begin(), t.rewards.end(), 0.0);
  std::fill(t.values.begin(), t.values.end(), 0.0);
  std::fill(t.truncation_values.begin(), t.truncation_values.end(), 0.0);
  t.bootstrap_value = 0.0;
  const auto adv = ppo::compute_gae(t, 0.99, 0.95);
  for (double a : adv.advantages) CHECK(a == 0.0);
}

TEST_CASE("gae matches direct summation") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ppo::Trajectory t = synthetic(300, rng, 0.02);
    const auto adv = ppo::compute_gae(t, 0.99, 0.95);
    const auto oracle = gae_oracle(t, 0.99, 0.95);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(adv.advantages[i] - oracle[i]) < 1e-10);
      CHECK(std::abs(adv.returns[i] - (oracle[i] + t.values[i])) < 1e-10);
    }
  }
}

TEST_CASE("rollout on pendulum closes one episode per 200 steps") {
  auto policy = pendulum_policy("vanilla", 0);
  auto env = envs::make_environment("pendulum", 5);
  ppo::RolloutState state{env.get(), {}, 0.0, true};
  Rng rng(1);
  const auto t = ppo::collect_rollout(policy, state, 400, rng);
  t.validate();
  REQUIRE(t.episode_returns.size() == 2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.dones[i] == ((i + 1) % 200 == 0));
    const double v = policy.value(t.next_observations.row(static_cast<Eigen::Index>(i)))(0, 0);
    CHECK(t.truncation_values[i] == (t.dones[i] ? v : 0.0));
  }
  for (int e = 0; e < 2; ++e) {
    const double sum = std::accumulate(t.rewards.begin() + e * 200, t.rewards.begin() + (e + 1) * 200, 0.0);
    CHECK(sum == doctest::Approx(t.episode_returns[static_cast<std::size_t>(e)]).epsilon(1e-12));
  }
  CHECK(t.bootstrap_value == 0.0);
  CHECK(state.needs_reset);
}

TEST_CASE("rollout carries an unfinished episode into the next one") {
  auto policy = pendulum_policy("vanilla", 0);
  auto env = envs::make_environment("pendulum", 5);
  ppo::RolloutState state{env.get(), {}, 0.0, true};
  Rng rng(1);
  const auto a = ppo::collect_rollout(policy, state, 150, rng);
  CHECK(a.episode_returns.empty());
  CHECK_FALSE(state.needs_reset);
  const Matrix last = Eigen::Map<const Matrix>(policy.normalize(state.raw_observation).data(), 1, 3);
  CHECK(a.bootstrap_value == policy.value(last)(0, 0));
  const auto b = ppo::collect_rollout(policy, state, 100, rng);
  REQUIRE(b.episode_returns.size() == 1);
  const double sum = std::accumulate(a.rewards.begin(), a.rewards.end(), 0.0) +
                     std::accumulate(b.rewards.begin(), b.rewards.begin() + 50, 0.0);
  CHECK(sum == doctest::Approx(b.episode_returns[0]).epsilon(1e-12));
  CHECK(b.dones[49]);
}

TEST_CASE("rollout is deterministic") {
  auto run = [] {
    auto policy = pendulum_policy("lipsnet", 7);
    auto env = envs::make_environment("pendulum", 9);
    ppo::RolloutState state{env.get(), {}, 0.0, true};
    Rng rng(2);
    return ppo::collect_rollout(policy, state, 300, rng);
  };
  const auto a = run(), b = run();
  CHECK(a.observations == b.observations);
  CHECK(a.actions == b.actions);
  CHECK(a.rewards == b.rewards);
  CHECK(a.log_probs == b.log_probs);
}

TEST_CASE("rollout reports the failing step") {
  auto policy = pendulum_policy("vanilla", 0);
  FaultyEnv env;
  ppo::RolloutState state{&env, {}, 0.0, true};
  Rng rng(1);
  try {
    ppo::collect_rollout(policy, state, 10, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == "numeric");
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
}

TEST_CASE("clipped surrogate") {
  const Matrix a = (Matrix(4, 1) << 1.0, -2.0, 0.5, 3.0).finished();
  SUBCASE("unit ratio gives minus mean advantage") {
    const auto l = ppo::clipped_surrogate_loss(Tensor(Matrix::Ones(4, 1)), Tensor(a), 0.2);
    CHECK(l.item() == doctest::Approx(-a.mean()).epsilon(1e-15));
  }
  SUBCASE("large ratio with positive advantage is clipped") {
    const auto l = ppo::clipped_surrogate_loss(Tensor(Matrix::Constant(1, 1, 1.5)), Tensor::scalar(2.0), 0.2);
    CHECK(l.item() == doctest::Approx(-1.2 * 2.0).epsilon(1e-15));
  }
  SUBCASE("small ratio with positive advantage is not clipped") {
    const auto l = ppo::clipped_surrogate_loss(Tensor(Matrix::Constant(1, 1, 0.5)), Tensor::scalar(2.0), 0.2);
    CHECK(l.item() == doctest::Approx(-0.5 * 2.0).epsilon(1e-15));
  }
  SUBCASE("small ratio with negative advantage is clipped") {
    const auto l = ppo::clipped_surrogate_loss(Tensor(Matrix::Constant(1, 1, 0.5)), Tensor::scalar(-2.0), 0.2);
    CHECK(l.item() == doctest::Approx(0.8 * 2.0).epsilon(1e-15));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(ppo::clipped_surrogate_loss(Tensor(Matrix::Ones(3, 1)), Tensor(a), 0.2), DimensionError);
  }
}

TEST_CASE("clip_global_norm") {
  std::vector<Matrix> g{(Matrix(1, 2) << 3.0, 0.0).finished(), (Matrix(1, 1) << 4.0).finished()};
  CHECK(ppo::clip_global_norm(g, 0.5) == doctest::Approx(5.0));
  const double norm = std::sqrt(g[0].squaredNorm() + g[1].squaredNorm());
  CHECK(norm == doctest::Approx(0.5 * 5.0 / (5.0 + 1e-6)).epsilon(1e-14));
  CHECK(g[0](0, 0) / g[1](0, 0) == doctest::Approx(0.75));
  std::vector<Matrix> small{(Matrix(1, 1) << 0.1).finished()};
  ppo::clip_global_norm(small, 0.5);
  CHECK(small[0](0, 0) == 0.1);
}

TEST_CASE("adam first step moves each coordinate by about the learning rate") {
  ad::ParameterStore store;
  store.add("w", (Matrix(1, 3) << 1.0, 2.0, 3.0).finished());
  ppo::Adam adam(store, 0.01, 0.9, 0.999, 1e-8);
  adam.step(store, {(Matrix(1, 3) << 0.5, -2.0, 1e-3).finished()});
  const Matrix& w = store.value(0);
  CHECK(w(0, 0) == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(w(0, 1) == doctest::Approx(2.01).epsilon(1e-6));
  CHECK(w(0, 2) == doctest::Approx(2.99).epsilon(1e-5));
  CHECK(adam.steps() == 1);
  CHECK_THROWS_AS(adam.step(store, {}), InputError);
}

TEST_CASE("ppo_update loss decomposition") {
  for (const std::string method : {"vanilla", "lipsnet+caps", "l2c2", "liu"}) {
    CAPTURE(method);
    auto policy = pendulum_policy(method, 3);
    auto env = envs::make_environment("pendulum", 4);
    ppo::RolloutState state{env.get(), {}, 0.0, true};
    Rng act(5), shuffle(6), reg(7);
    const auto t = ppo::collect_rollout(policy, state, 256, act);
    const auto adv = ppo::compute_gae(t, 0.99, 0.95);
    ppo::PpoConfig cfg;
    cfg.epochs = 2;
    const auto spec = regularizers::MethodSpec::parse(method);
    ppo::Adam opt(policy.params(), cfg.learning_rate, 0.9, 0.999, cfg.adam_epsilon);
    ppo::UpdateContext ctx{&opt, &shuffle, &reg, {}};
    const auto s = ppo::ppo_update(policy, t, adv, cfg, spec, ctx);
    CHECK(s.minibatches == 8);
    CHECK(opt.steps() == 8);
    CHECK(std::abs(s.total - (s.rl + s.reg)) < 1e-10);
    CHECK(std::abs(s.rl - (s.policy + cfg.value_coef * s.value - cfg.entropy_coef * s.entropy)) < 1e-10);
    if (method == "vanilla") CHECK(s.reg == 0.0);
    else CHECK(s.reg > 0.0);
  }
}

TEST_CASE("first minibatch sees unit ratios") {
  auto policy = pendulum_policy("vanilla", 3);
  auto env = envs::make_environment("pendulum", 4);
  ppo::RolloutState state{env.get(), {}, 0.0, true};
  Rng act(5), shuffle(6), reg(7);
  const auto t = ppo::collect_rollout(policy, state, 128, act, false);
  const auto adv = ppo::compute_gae(t, 0.99, 0.95);
  ppo::PpoConfig cfg;
  cfg.epochs = 1;
  cfg.minibatch_size = 128;
  ppo::Adam opt(policy.params(), cfg.learning_rate, 0.9, 0.999, cfg.adam_epsilon);
  ppo::UpdateContext ctx{&opt, &shuffle, &reg, {}};
  const auto s = ppo::ppo_update(policy, t, adv, cfg, regularizers::MethodSpec::parse("vanilla"), ctx);
  // Advantages are normalized, so −mean(A) vanishes.
  CHECK(std::abs(s.policy) < 1e-12);
  CHECK(s.clip_fraction == 0.0);
}

TEST_CASE("non-finite loss aborts with a minibatch dump") {
  auto policy = pendulum_policy("vanilla", 3);
  auto env = envs::make_environment("pendulum", 4);
  ppo::RolloutState state{env.get(), {}, 0.0, true};
  Rng act(5), shuffle(6), reg(7);
  auto t = ppo::collect_rollout(policy, state, 64, act);
  t.observations(10, 1) = std::nan("");
  const auto adv = ppo::compute_gae(t, 0.99, 0.95);
  ppo::PpoConfig cfg;
  const auto dir = std::filesystem::temp_directory_path() / "smoothrl_test_dump";
  std::filesystem::remove_all(dir);
  ppo::Adam opt(policy.params(), cfg.learning_rate, 0.9, 0.999, cfg.adam_epsilon);
  ppo::UpdateContext ctx{&opt, &shuffle, &reg, dir};
  CHECK_THROWS_AS(ppo::ppo_update(policy, t, adv, cfg, regularizers::MethodSpec::parse("vanilla"), ctx),
                  NumericError);
  const std::string dump = read_file(dir / "nonfinite_minibatch.txt");
  CHECK(dump.find("nan") != std::string::npos);
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 64);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ppo config validation and budgets") {
  ppo::PpoConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.clip_ratio = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.minibatch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(ppo::PpoConfig::defaults_for("pendulum").total_steps == 150000);
  CHECK(ppo::PpoConfig::defaults_for("reacher").total_steps == 400000);
}

TEST_CASE("training honours the exact step budget") {
  auto spec = small_run("vanilla", 1);
  spec.ppo.total_steps = 600;
  const auto r = ppo::train(spec);
  CHECK(r.steps == 600);
  REQUIRE(r.curve.size() == 3);
  CHECK(r.curve[0].step == 256);
  CHECK(r.curve[1].step == 512);
  CHECK(r.curve[2].step == 600);
  CHECK(r.curve[0].mean_episode_return < 0.0);
  CHECK(r.curve[1].mean_episode_return < 0.0);
  CHECK(r.curve[2].mean_episode_return < 0.0);
}

TEST_CASE("training is reproducible") {
  auto a = ppo::train(small_run("lipsnet+caps", 4));
  auto b = ppo::train(small_run("lipsnet+caps", 4));
  auto c = ppo::train(small_run("lipsnet+caps", 5));
  CHECK(ad::checkpoint_hash(a.policy.checkpoint()) == ad::checkpoint_hash(b.policy.checkpoint()));
  CHECK(ad::checkpoint_hash(a.policy.checkpoint()) != ad::checkpoint_hash(c.policy.checkpoint()));
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].loss_total == b.curve[i].loss_total);
}

TEST_CASE("methods with zero weights reproduce vanilla") {
  auto vanilla = ppo::train(small_run("vanilla", 2));
  const std::string reference = ad::checkpoint_hash(vanilla.policy.checkpoint());
  for (const auto& name : regularizers::method_names()) {
    CAPTURE(name);
    auto spec = small_run(name, 2);
    spec.method = spec.method.neutralized();
    auto r = ppo::train(spec);
    CHECK(ad::checkpoint_hash(r.policy.checkpoint()) == reference);
    for (std::size_t i = 0; i < r.curve.size(); ++i) {
      CHECK(r.curve[i].loss_rl == vanilla.curve[i].loss_rl);
      CHECK(r.curve[i].loss_reg == 0.0);
    }
  }
}

TEST_CASE("training curve csv round trip") {
  const auto path = std::filesystem::temp_directory_path() / "smoothrl_curve.csv";
  const std::vector<ppo::CurveRow> rows{{2048, -1234.5678901234567, 1.5, 1.25, 0.25}, {4096, -900.125, 0.1, 0.1, 0.0}};
  ppo::write_training_curve(path, rows);
  CHECK(read_file(path).rfind("step,mean_episode_return,loss_total,loss_rl,loss_reg\n", 0) == 0);
  const auto back = ppo::read_training_curve(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].step == 2048);
  CHECK(back[0].mean_episode_return == rows[0].mean_episode_return);
  CHECK(back[1].loss_reg == 0.0);
  write_file_atomic(path, "nope\n");
  CHECK_THROWS_AS(ppo::read_training_curve(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("curve return is undefined until an episode finishes") {
  auto spec = small_run("vanilla", 1);
  spec.ppo.rollout_length = 128;
  spec.ppo.total_steps = 384;
  const auto r = ppo::train(spec);
  REQUIRE(r.curve.size() == 3);
  CHECK(std::isnan(r.curve[0].mean_episode_return));
  CHECK(r.curve[1].mean_episode_return < 0.0);
  CHECK(r.curve[2].mean_episode_return == r.curve[1].mean_episode_return);
}
