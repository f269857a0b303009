#pragma once

#include "smoothrl/policies/actor_critic.hpp"

#include <set>
#include <string>
#include <string_view>

namespace smoothrl::regularizers {

using policies::Architecture;

struct CapsConfig {
  double sigma = 0.1;
  double lambda_t = 0.1;
  double lambda_s = 0.5;

  void validate() const;
};

/// Only the fixed-weight form is used; lambda_lower, lambda_upper and beta are
/// carried for configs that specify an adaptive schedule.
struct L2c2Config {
  double sigma = 1.0;
  double lambda_pi = 1.0;
  double lambda_v = 1.0;
  double lambda_lower = 0.0;
  double lambda_upper = 1.0;
  double beta = 0.1;

  void validate() const;
};

enum class Regularizer { kCaps, kL2c2, kLiuLoss, kLipsNetKLoss };

std::string_view to_string(Regularizer r);

/// Architecture choice, active regularizers and their hyperparameters.
struct MethodSpec {
  std::string name;
  Architecture architecture = Architecture::kPlain;
  std::set<Regularizer> regularizers;
  CapsConfig caps;
  L2c2Config l2c2;
  policies::LiuLipschitzSpec liu;
  policies::LipsNetSpec lipsnet;

  bool has(Regularizer r) const { return regularizers.count(r) != 0; }
  /// Throws ConfigError when the architecture/regularizer pairing is inconsistent.
  void validate() const;

  /// One of: vanilla | caps | l2c2 | local_sn | liu | lipsnet | lipsnet+caps | lipsnet+l2c2.
  static MethodSpec parse(std::string_view text);

  /// Policy layout for an environment with the given dimensions.
  policies::PolicySpec policy_spec(int obs_dim, int act_dim) const;

  /// Same method with a plain architecture and every regularization weight at 0.
  MethodSpec neutralized() const;

  /// Stable `key=value;...` rendering of every setting, for hashing.
  std::string canonical() const;
};

/// The method grammar, as shown in usage errors.
std::string_view method_grammar();
const std::vector<std::string>& method_names();

}  // namespace smoothrl::regularizers
