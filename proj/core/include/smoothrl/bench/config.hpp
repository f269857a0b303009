#pragma once

#include "smoothrl/envs/randomization.hpp"
#include "smoothrl/ppo/trainer.hpp"
#include "smoothrl/regularizers/method.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smoothrl::bench {

inline constexpr int kFormatVersion = 1;

struct TraceOptions {
  int episodes = 0;  // per run; 0 disables trace dumps
  bool spectrum = false;
};

/// Method hyperparameters applied on top of MethodSpec::parse defaults.
/// Unset fields keep the preset.
struct MethodOverrides {
  std::map<std::string, double> caps;
  std::map<std::string, double> l2c2;
  std::map<std::string, double> lipsnet;
  std::map<std::string, double> liu;

  regularizers::MethodSpec apply(regularizers::MethodSpec spec) const;
};

/// A method × env × seed grid plus everything needed to train and evaluate it.
/// See docs in README for the YAML schema.
struct BenchmarkConfig {
  int format_version = kFormatVersion;
  std::vector<std::string> envs{"pendulum"};
  std::vector<std::string> methods = regularizers::method_names();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8};
  /// Per-env step budgets; envs missing here use PpoConfig::defaults_for.
  std::map<std::string, long> steps;
  int eval_episodes = 100;
  std::filesystem::path output_dir = "results";
  int workers = 1;
  bool randomization = false;
  /// Overrides of DomainRandomizationConfig::defaults_for(env) when randomization is on.
  std::optional<double> dr_action_noise_std;
  std::optional<envs::Interval> dr_mass_scale_range;
  std::map<std::string, double> dr_obs_noise_std;
  std::map<std::string, double> ppo;  // PpoConfig field overrides, by name
  MethodOverrides method_params;
  TraceOptions traces;

  /// Throws ConfigError on an unknown env or method, no seeds, or bad counts.
  void validate() const;

  long steps_for(const std::string& env) const;
  ppo::PpoConfig ppo_for(const std::string& env) const;
  regularizers::MethodSpec method_for(const std::string& name) const;
  std::optional<envs::DomainRandomizationConfig> randomization_for(const std::string& env) const;
};

/// Parses the YAML form. Unknown keys are rejected.
BenchmarkConfig parse_config(const std::string& yaml_text);
BenchmarkConfig load_config(const std::filesystem::path& path);

/// `0..count-1`, or an explicit comma-separated list such as "3,5,8".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

struct RunKey {
  std::string env;
  std::string method;
  std::uint64_t seed = 0;

  /// File stem, e.g. `pendulum__lipsnet+caps__s3`.
  std::string id() const;
};

/// Every (env, method, seed) in config order.
std::vector<RunKey> expand(const BenchmarkConfig& config);

/// Stable text of everything that influences one run's result.
std::string run_fingerprint(const BenchmarkConfig& config, const RunKey& key);
std::string run_hash(const BenchmarkConfig& config, const RunKey& key);

}  // namespace smoothrl::bench
