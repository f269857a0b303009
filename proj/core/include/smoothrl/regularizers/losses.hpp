#pragma once

#include "smoothrl/regularizers/method.hpp"

#include <functional>

namespace smoothrl::regularizers {

using ad::Matrix;
using ad::Tensor;
using TensorFn = std::function<Tensor(const Tensor&)>;

/// Mean Euclidean distance between matching rows.
Tensor mean_distance(const Tensor& a, const Tensor& b);

/// λ_T·mean‖π(s)−π(s')‖ + λ_S·mean‖π(s)−π(s+noise)‖ with `noise` pinned.
/// `pi_s` may carry a precomputed π(s).
Tensor caps_loss(const TensorFn& pi, const Tensor& s, const Tensor& s_next, const Matrix& noise,
                 const CapsConfig& cfg, const Tensor& pi_s = {});
/// Draws noise ~ N(0, σ²) elementwise from `rng`.
Tensor caps_loss(const TensorFn& pi, const Tensor& s, const Tensor& s_next, const CapsConfig& cfg, Rng& rng,
                 const Tensor& pi_s = {});

/// With s̄ = s + (s'−s)⊙u: λ_π·mean‖π(s)−π(s̄)‖ + λ_V·mean|V(s)−V(s̄)|, `u` pinned.
Tensor l2c2_loss(const TensorFn& pi, const TensorFn& value, const Tensor& s, const Tensor& s_next, const Matrix& u,
                 const L2c2Config& cfg, const Tensor& pi_s = {}, const Tensor& v_s = {});
/// Draws u ~ U[−σ, σ] elementwise from `rng`.
Tensor l2c2_loss(const TensorFn& pi, const TensorFn& value, const Tensor& s, const Tensor& s_next,
                 const L2c2Config& cfg, Rng& rng, const Tensor& pi_s = {}, const Tensor& v_s = {});

/// Everything the regularizers of one minibatch may need.
struct RegularizerBatch {
  TensorFn pi;
  TensorFn value;
  Tensor s;
  Tensor s_next;
  Tensor pi_s;
  Tensor v_s;
  /// Weighted architectural penalty from the actor forward pass.
  Tensor arch_penalty;
};

/// Σ of the active regularizer losses; a constant 0 when none is active.
Tensor regularization(const MethodSpec& method, const RegularizerBatch& batch, Rng& rng);

/// L = L_RL + regularization. With no active regularizer returns `rl_loss` itself.
Tensor total_loss(const Tensor& rl_loss, const MethodSpec& method, const RegularizerBatch& batch, Rng& rng);

}  // namespace smoothrl::regularizers
