#include <doctest.h>

#include "support/oracles.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/regularizers/losses.hpp"

using namespace smoothrl;
using namespace smoothrl::regularizers;
using smoothrl::testing::random_matrix;
using smoothrl::ad::ParameterStore;

namespace {

TensorFn constant_fn(Matrix c) {
  return [c](const Tensor& x) { return Tensor(Matrix(c.replicate(x.rows(), 1))); };
}

TensorFn identity_fn() {
  return [](const Tensor& x) { return x; };
}

struct Fixture {
  policies::ActorCritic ac;
  Matrix s, s_next, noise, u;

  explicit Fixture(policies::Architecture arch, std::uint64_t seed = 1) {
    policies::PolicySpec spec;
    spec.architecture = arch;
    spec.obs_dim = 3;
    spec.act_dim = 2;
    ac = policies::ActorCritic::create(spec, seed);
    std::mt19937_64 rng(seed);
    s = random_matrix(rng, 6, 3);
    s_next = s + random_matrix(rng, 6, 3, -0.3, 0.3);
    noise = random_matrix(rng, 6, 3, -0.1, 0.1);
    u = random_matrix(rng, 6, 3, -1, 1);
  }

  // Scalar loss at a given store, with every random draw pinned.
  double loss(const ParameterStore& store, bool l2c2) const {
    ad::Tape tape;
    const auto p = policies::Bound::on(tape, store);
    return build(p, l2c2).item();
  }

  Tensor build(const policies::Bound& p, bool l2c2) const {
    const TensorFn pi = [&](const Tensor& x) { return ac.actor(p, x).mean; };
    const TensorFn v = [&](const Tensor& x) { return ac.value(p, x); };
    return l2c2 ? l2c2_loss(pi, v, Tensor(s), Tensor(s_next), u, L2c2Config{})
                : caps_loss(pi, Tensor(s), Tensor(s_next), noise, CapsConfig{});
  }
};

}  // namespace

TEST_CASE("caps: constant policy has zero loss") {
  std::mt19937_64 rng(0);
  const Matrix s = random_matrix(rng, 5, 3), s2 = random_matrix(rng, 5, 3);
  Rng r(1);
  CHECK(caps_loss(constant_fn(Matrix{{0.3, -1.0}}), Tensor(s), Tensor(s2), CapsConfig{}, r).item() == 0.0);
}

TEST_CASE("caps: linear policy with a pinned sample") {
  const Tensor s(Matrix{{0.0}}), s2(Matrix{{1.0}});
  const Tensor loss = caps_loss(identity_fn(), s, s2, Matrix{{0.1}}, CapsConfig{0.1, 0.1, 0.5});
  CHECK(loss.item() == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("caps and l2c2 defaults") {
  const CapsConfig caps;
  CHECK(caps.sigma == 0.1);
  CHECK(caps.lambda_t == 0.1);
  CHECK(caps.lambda_s == 0.5);
  const L2c2Config l2c2;
  CHECK(l2c2.sigma == 1.0);
}

TEST_CASE("l2c2: no motion and constant networks give zero loss") {
  std::mt19937_64 rng(2);
  const Matrix s = random_matrix(rng, 4, 3);
  Rng r(3);
  const Fixture fx(policies::Architecture::kPlain);
  ad::Tape tape;
  const auto p = policies::Bound::on(tape, fx.ac.params());
  const TensorFn pi = [&](const Tensor& x) { return fx.ac.actor(p, x).mean; };
  const TensorFn v = [&](const Tensor& x) { return fx.ac.value(p, x); };
  CHECK(l2c2_loss(pi, v, Tensor(s), Tensor(s), L2c2Config{}, r).item() == 0.0);
  const Matrix s2 = random_matrix(rng, 4, 3);
  CHECK(l2c2_loss(constant_fn(Matrix{{1.0, 2.0}}), constant_fn(Matrix{{-4.0}}), Tensor(s), Tensor(s2), L2c2Config{}, r)
            .item() == 0.0);
}

TEST_CASE("l2c2: pinned sample on linear networks") {
  // s̄ = 0 + (2 − 0)·0.25 = 0.5; ‖π(s)−π(s̄)‖ = 0.5 and |V(s)−V(s̄)| = 1.5 with V = 3x.
  const TensorFn v = [](const Tensor& x) { return ad::scale(x, 3.0); };
  L2c2Config cfg;
  cfg.lambda_pi = 0.4;
  cfg.lambda_v = 2.0;
  const Tensor loss = l2c2_loss(identity_fn(), v, Tensor(Matrix{{0.0}}), Tensor(Matrix{{2.0}}), Matrix{{0.25}}, cfg);
  CHECK(loss.item() == doctest::Approx(0.4 * 0.5 + 2.0 * 1.5).epsilon(1e-14));
}

TEST_CASE("regularizer losses are non-negative") {
  Rng r(4);
  for (auto arch : {policies::Architecture::kPlain, policies::Architecture::kLipsNet}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Fixture fx(arch, seed);
      ad::Tape tape;
      const auto p = policies::Bound::on(tape, fx.ac.params());
      const TensorFn pi = [&](const Tensor& x) { return fx.ac.actor(p, x).mean; };
      const TensorFn v = [&](const Tensor& x) { return fx.ac.value(p, x); };
      CHECK(caps_loss(pi, Tensor(fx.s), Tensor(fx.s_next), CapsConfig{}, r).item() >= 0.0);
      CHECK(l2c2_loss(pi, v, Tensor(fx.s), Tensor(fx.s_next), L2c2Config{}, r).item() >= 0.0);
    }
  }
}

TEST_CASE("regularizer gradients match finite differences") {
  for (auto arch : {policies::Architecture::kPlain, policies::Architecture::kLipsNet}) {
    for (bool l2c2 : {false, true}) {
      Fixture fx(arch, 7);
      ad::Tape tape;
      const auto p = policies::Bound::on(tape, fx.ac.params());
      const Tensor loss = fx.build(p, l2c2);
      const auto idx = fx.ac.params().trainable_indices();
      std::vector<Tensor> vars;
      for (auto i : idx) vars.push_back(p[i]);
      const auto grads = ad::grad(loss, std::span<const Tensor>(vars));
      for (std::size_t j = 0; j < idx.size(); ++j) {
        auto f = [&](const Matrix& value) {
          ParameterStore s = fx.ac.params();
          s.set(idx[j], value);
          return fx.loss(s, l2c2);
        };
        CAPTURE(policies::to_string(arch));
        CAPTURE(l2c2);
        CAPTURE(fx.ac.params().name(idx[j]));
        const Matrix fd = testing::finite_difference(f, fx.ac.params().value(idx[j]), 1e-7);
        CHECK(testing::max_relative_error(grads[j].value(), fd) < 1e-3);
      }
    }
  }
}

TEST_CASE("empty batches are rejected") {
  Rng r(0);
  const Tensor empty(Matrix(0, 3));
  CHECK_THROWS_AS(caps_loss(identity_fn(), empty, empty, CapsConfig{}, r), InputError);
  CHECK_THROWS_AS(l2c2_loss(identity_fn(), identity_fn(), empty, empty, L2c2Config{}, r), InputError);
}

TEST_CASE("method grammar") {
  for (const auto& name : method_names()) {
    const MethodSpec m = MethodSpec::parse(name);
    CHECK_NOTHROW(m.validate());
    CHECK(m.name == name);
  }
  CHECK(MethodSpec::parse("vanilla").regularizers.empty());
  CHECK(MethodSpec::parse("lipsnet+l2c2").has(Regularizer::kL2c2));
  CHECK(MethodSpec::parse("lipsnet+l2c2").has(Regularizer::kLipsNetKLoss));
  CHECK(MethodSpec::parse("liu").architecture == Architecture::kLiu);
  try {
    MethodSpec::parse("sac");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("lipsnet+l2c2") != std::string::npos);
  }
}

TEST_CASE("method invariants are enforced") {
  MethodSpec m = MethodSpec::parse("liu");
  m.architecture = Architecture::kPlain;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = MethodSpec::parse("caps");
  m.regularizers.insert(Regularizer::kL2c2);
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = MethodSpec::parse("lipsnet");
  m.regularizers.clear();
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = MethodSpec::parse("caps");
  m.caps.sigma = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  CHECK(MethodSpec::parse("caps").canonical() != MethodSpec::parse("l2c2").canonical());
}

TEST_CASE("total loss composition") {
  const Tensor rl(Matrix{{1.25}});
  Rng r(0);
  RegularizerBatch empty_batch;
  const Tensor vanilla = total_loss(rl, MethodSpec::parse("vanilla"), empty_batch, r);
  CHECK(vanilla.storage() == rl.storage());

  Fixture fx(policies::Architecture::kLipsNet, 3);
  ad::Tape tape;
  const auto p = policies::Bound::on(tape, fx.ac.params());
  const auto fwd = fx.ac.actor(p, Tensor(fx.s));
  RegularizerBatch b;
  b.pi = [&](const Tensor& x) { return fx.ac.actor(p, x).mean; };
  b.value = [&](const Tensor& x) { return fx.ac.value(p, x); };
  b.s = Tensor(fx.s);
  b.s_next = Tensor(fx.s_next);
  b.pi_s = fwd.mean;
  b.arch_penalty = fwd.penalty;
  Rng r1(9), r2(9);
  const double total = total_loss(rl, MethodSpec::parse("lipsnet+l2c2"), b, r1).item();
  const double l2c2 = l2c2_loss(b.pi, b.value, b.s, b.s_next, L2c2Config{}, r2).item();
  const double k_term = 0.1 * std::get<policies::LipsNetMean>(fx.ac.mean_net()).lipschitz(fx.ac.params(), fx.s).mean();
  CHECK(total == doctest::Approx(1.25 + l2c2 + k_term).epsilon(1e-12));

  MethodSpec zero = MethodSpec::parse("caps");
  zero.caps.lambda_t = zero.caps.lambda_s = 0.0;
  Rng r3(1);
  CHECK(total_loss(rl, zero, b, r3).item() == 1.25);
}
