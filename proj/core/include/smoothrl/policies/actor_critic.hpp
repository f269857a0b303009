#pragma once

#include "smoothrl/policies/architectures.hpp"

#include <cstdint>
#include <map>
#include <span>

namespace smoothrl::policies {

struct PolicySpec {
  Architecture architecture = Architecture::kPlain;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  Activation activation = Activation::kTanh;
  double log_std_init = 0.0;
  double obs_clip = 10.0;
  SpectralNormSpec spectral_norm;
  LiuLipschitzSpec liu;
  LipsNetSpec lipsnet;

  void validate() const;
  std::map<std::string, std::string> to_meta() const;
  static PolicySpec from_meta(const std::map<std::string, std::string>& meta);
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

enum class ActMode { kStochastic, kDeterministic };

struct ActResult {
  std::vector<double> action;
  double log_prob = 0.0;
  double value = 0.0;
};

/// Diagonal Gaussian log-density of each row of `actions` (B×1).
Tensor gaussian_log_prob(const Tensor& mean, const Tensor& log_std, const Tensor& actions);
double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action);

/// Gaussian actor with a configurable mean network, a plain value network
/// and running observation statistics, all held in one ParameterStore.
///
/// Parameter names: `actor.*`, `actor.log_std`, `critic.*` (trainable);
/// `obs_rms.mean`, `obs_rms.var`, `obs_rms.count`, `actor.sn_u`, `actor.sn_v`
/// (buffers).
class ActorCritic {
 public:
  static ActorCritic create(const PolicySpec& spec, std::uint64_t seed);
  static ActorCritic from_checkpoint(const ad::Checkpoint& checkpoint);

  const PolicySpec& spec() const { return spec_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const MeanNet& mean_net() const { return mean_; }

  struct Forward {
    Tensor mean;     // B×act
    Tensor log_std;  // 1×act, clamped
    Tensor penalty;  // 1×1
  };
  /// Actor on already-normalized observations.
  Forward actor(const Bound& p, const Tensor& obs) const;
  /// Critic on already-normalized observations (B×1).
  Tensor value(const Bound& p, const Tensor& obs) const;

  /// Tape-free evaluation on normalized observations.
  Matrix mean(const Matrix& obs) const;
  Matrix value(const Matrix& obs) const;
  std::vector<double> log_std() const;

  /// Maps raw observations into the network input space with the current statistics.
  Matrix normalize(const Matrix& raw) const;
  std::vector<double> normalize(std::span<const double> raw) const;
  /// Folds one raw observation into the running mean/variance.
  void update_obs_stats(std::span<const double> raw);

  /// `obs` must already be normalized.
  ActResult act(std::span<const double> obs, ActMode mode, Rng& rng) const;

  /// Architecture-specific maintenance between optimizer steps.
  void refresh(int iterations);

  /// Snapshot with spec metadata; spectral-norm vectors are first advanced by
  /// the checkpoint iteration count.
  ad::Checkpoint checkpoint();

 private:
  PolicySpec spec_;
  ParameterStore params_;
  MeanNet mean_;
  Mlp critic_;
  std::size_t log_std_ = 0;
  std::size_t rms_mean_ = 0, rms_var_ = 0, rms_count_ = 0;

  void attach();
};

}  // namespace smoothrl::policies
