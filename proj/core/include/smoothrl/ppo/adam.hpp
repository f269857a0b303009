#pragma once

#include "smoothrl/autodiff/parameters.hpp"

#include <vector>

namespace smoothrl::ppo {

/// Adam over the trainable entries of a ParameterStore.
class Adam {
 public:
  Adam(const ad::ParameterStore& store, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  /// `grads` is aligned with store.trainable_indices().
  void step(ad::ParameterStore& store, const std::vector<ad::Matrix>& grads);
  long steps() const { return t_; }

 private:
  std::vector<std::size_t> indices_;
  std::vector<ad::Matrix> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Scales `grads` in place so their joint L2 norm is at most `max_norm`;
/// returns the norm before clipping.
double clip_global_norm(std::vector<ad::Matrix>& grads, double max_norm);

}  // namespace smoothrl::ppo
