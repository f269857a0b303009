#include <doctest.h>

#include "support/oracles.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/metrics/evaluate.hpp"
#include "smoothrl/regularizers/method.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace smoothrl;
using smoothrl::testing::direct_dft;
using smoothrl::testing::direct_sm;

namespace {

std::vector<double> random_trace(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = uniform(rng, -2.0, 2.0);
  return x;
}

}  // namespace

TEST_CASE("smoothness matches a direct DFT") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 8 + rng() % 300;
    const std::size_t dims = 1 + rng() % 3;
    const double f_s = uniform(rng, 1.0, 100.0);
    std::vector<std::vector<double>> trace(len, std::vector<double>(dims));
    std::vector<std::vector<double>> cols(dims, std::vector<double>(len));
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t d = 0; d < dims; ++d) cols[d][t] = trace[t][d] = uniform(rng, -2.0, 2.0);
    }
    const auto s = metrics::smoothness(trace, f_s);
    CHECK(s.n == static_cast<int>(len / 2));
    double expected = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      std::vector<double> amps;
      const double sm = direct_sm(cols[d], f_s, &amps);
      expected += sm / static_cast<double>(dims);
      CHECK(std::abs(s.dims[d].sm - sm) < 1e-9);
      REQUIRE(s.dims[d].amplitude.size() == amps.size());
      for (std::size_t i = 0; i < amps.size(); ++i) CHECK(std::abs(s.dims[d].amplitude[i] - amps[i]) < 1e-9);
    }
    CHECK(std::abs(s.sm - expected) < 1e-9);
  }
}

TEST_CASE("constant traces have zero smoothness") {
  for (double c : {0.0, 0.1, -1.7, 3e5}) {
    for (std::size_t len : {8u, 200u, 151u}) {
      const std::vector<double> x(len, c);
      const auto s = metrics::smoothness(x, 20.0);
      CHECK(s.sm == 0.0);
      for (double m : s.dims[0].amplitude) CHECK(m == 0.0);
    }
  }
}

TEST_CASE("alternating signal is a single Nyquist band") {
  std::vector<double> x(64);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = t % 2 == 0 ? 1.0 : -1.0;
  const auto s = metrics::smoothness(x, 20.0);
  REQUIRE(s.n == 32);
  const auto& d = s.dims[0];
  CHECK(d.freq_hz.back() == 10.0);
  CHECK(d.amplitude.back() == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i + 1 < d.amplitude.size(); ++i) CHECK(std::abs(d.amplitude[i]) < 1e-12);
  CHECK(std::abs(s.sm - direct_sm(x, 20.0)) < 1e-9);
  CHECK(s.sm == doctest::Approx(2.0 / (32 * 20.0) * 10.0).epsilon(1e-13));
}

TEST_CASE("pure tone lands in its band") {
  const std::size_t len = 200;
  std::vector<double> x(len);
  for (std::size_t t = 0; t < len; ++t) x[t] = 0.5 * std::sin(2.0 * std::numbers::pi * 7.0 * static_cast<double>(t) / len);
  const auto s = metrics::smoothness(x, 20.0);
  CHECK(s.dims[0].freq_hz[6] == doctest::Approx(0.7));
  CHECK(s.dims[0].amplitude[6] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.sm == doctest::Approx(2.0 / (100 * 20.0) * 0.5 * 0.7).epsilon(1e-12));
}

TEST_CASE("parseval relates amplitudes to variance") {
  Rng rng(5);
  for (std::size_t len : {64u, 200u, 151u, 9u}) {
    auto x = random_trace(rng, len);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double& v : x) {
      v -= mean;
      var += v * v;
    }
    var /= static_cast<double>(len);
    const auto s = metrics::smoothness(x, 20.0);
    double energy = 0.0;
    for (int i = 1; i <= s.n; ++i) {
      const double m = s.dims[0].amplitude[static_cast<std::size_t>(i - 1)];
      energy += 2 * static_cast<std::size_t>(i) == len ? m * m : m * m / 2.0;
    }
    CHECK(std::abs(energy - var) < 1e-6 * var);
  }
}

TEST_CASE("offset invariance") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_trace(rng, 200);
    auto y = x;
    const double c = uniform(rng, -5.0, 5.0);
    for (double& v : y) v += c;
    const double a = metrics::smoothness(x, 20.0).sm, b = metrics::smoothness(y, 20.0).sm;
    CHECK(std::abs(a - b) <= 1e-12 * a);
  }
  // Dyadic samples and offset keep every sum exact.
  std::vector<double> x(64), y(64);
  for (std::size_t t = 0; t < x.size(); ++t) {
    x[t] = static_cast<double>((t * 37) % 11) / 8.0;
    y[t] = x[t] + 3.0;
  }
  CHECK(metrics::smoothness(x, 20.0).sm == metrics::smoothness(y, 20.0).sm);
}

TEST_CASE("linear in amplitude") {
  Rng rng(9);
  const auto x = random_trace(rng, 150);
  const double base = metrics::smoothness(x, 20.0).sm;
  for (double k : {0.5, 2.0, -3.0, 1e3}) {
    auto y = x;
    for (double& v : y) v *= k;
    CHECK(metrics::smoothness(y, 20.0).sm == doctest::Approx(std::abs(k) * base).epsilon(1e-12));
  }
}

TEST_CASE("sampling frequency cancels out of Sm") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_trace(rng, 8 + rng() % 200);
    const double f_s = uniform(rng, 1.0, 50.0);
    const auto a = metrics::smoothness(x, f_s), b = metrics::smoothness(x, 2.0 * f_s);
    CHECK(b.sm == a.sm);
    for (std::size_t i = 0; i < a.dims[0].freq_hz.size(); ++i) {
      CHECK(b.dims[0].freq_hz[i] == 2.0 * a.dims[0].freq_hz[i]);
      if (i > 0) CHECK(a.dims[0].freq_hz[i] > a.dims[0].freq_hz[i - 1]);
    }
  }
}

TEST_CASE("smoothness input errors") {
  CHECK_THROWS_AS(metrics::smoothness(std::vector<double>(7, 1.0), 20.0), InputError);
  CHECK_NOTHROW(metrics::smoothness(std::vector<double>(8, 1.0), 20.0));
  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(metrics::smoothness(bad, 20.0), InputError);
  bad[3] = INFINITY;
  CHECK_THROWS_AS(metrics::smoothness(bad, 20.0), InputError);
  CHECK_THROWS_AS(metrics::smoothness(std::vector<double>(16, 0.0), 0.0), InputError);
  std::vector<std::vector<double>> ragged(16, std::vector<double>(2, 0.0));
  ragged[4].pop_back();
  CHECK_THROWS_AS(metrics::smoothness(ragged, 20.0), InputError);
}

TEST_CASE("spectrum csv") {
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<double> x(8);
  for (std::size_t t = 0; t < 8; ++t) x[t] = t % 2 == 0 ? 1.0 : -1.0;
  metrics::write_spectrum_csv(dir / "smoothrl_spec1.csv", metrics::smoothness(x, 20.0));
  CHECK(read_file(dir / "smoothrl_spec1.csv") == "freq_hz,amplitude\n2.5,0\n5,0\n7.5,0\n10,1\n");
  std::vector<std::vector<double>> two(8, std::vector<double>(2, 0.0));
  metrics::write_spectrum_csv(dir / "smoothrl_spec2.csv", metrics::smoothness(two, 20.0));
  CHECK(read_file(dir / "smoothrl_spec2.csv").rfind("dim,freq_hz,amplitude\n0,2.5,0\n", 0) == 0);
  std::filesystem::remove(dir / "smoothrl_spec1.csv");
  std::filesystem::remove(dir / "smoothrl_spec2.csv");
}

TEST_CASE("cumulative return") {
  CHECK(metrics::cumulative_return(std::vector<double>{1, 2, 3}) == 6.0);
  CHECK(metrics::cumulative_return(std::vector<double>(200, 0.0)) == 0.0);
  CHECK_THROWS_AS(metrics::cumulative_return(std::vector<double>{}), InputError);
}

TEST_CASE("mean and sample std") {
  const std::vector<double> v{1, 2, 3};
  CHECK(metrics::mean_std(v) == std::pair<double, double>{2.0, 1.0});
  const std::vector<double> one{4.5};
  CHECK(metrics::mean_std(one) == std::pair<double, double>{4.5, 0.0});
}

TEST_CASE("evaluation") {
  auto policy = policies::ActorCritic::create(regularizers::MethodSpec::parse("vanilla").policy_spec(3, 1), 2);
  SUBCASE("single episode has zero spread") {
    const auto e = metrics::evaluate(policy, "pendulum", 1, 3);
    CHECK(e.episodes == 1);
    CHECK(e.return_std == 0.0);
    CHECK(e.sm_std == 0.0);
    CHECK(e.return_mean == e.returns[0]);
  }
  SUBCASE("deterministic for a checkpoint and seed") {
    auto restored = policies::ActorCritic::from_checkpoint(policy.checkpoint());
    const auto a = metrics::evaluate(policy, "pendulum", 5, 3);
    const auto b = metrics::evaluate(restored, "pendulum", 5, 3);
    CHECK(a.returns == b.returns);
    CHECK(a.sms == b.sms);
    CHECK(a.return_std > 0.0);
  }
  SUBCASE("episode record matches the metrics") {
    auto env = envs::make_environment("pendulum", 4);
    const auto r = metrics::run_episode(policy, *env);
    REQUIRE(r.actions.size() == 200);
    CHECK(r.episode_return == metrics::cumulative_return(r.rewards));
    CHECK(r.sm == metrics::smoothness(r.actions, 20.0).sm);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(metrics::evaluate(policy, "reacher", 1, 3), DimensionError);
    CHECK_THROWS_AS(metrics::evaluate(policy, "pendulum", 0, 3), InputError);
  }
}
