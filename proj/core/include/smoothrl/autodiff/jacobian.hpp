#pragma once

#include "smoothrl/autodiff/tensor.hpp"

#include <functional>

namespace smoothrl::ad {

/// Per-row spectral norm of the input Jacobian, ‖∂y_b/∂x_b‖₂ for every row b.
///
/// `y` (B×m) must have been computed row-by-row from `x` (B×n), and `x` must
/// require grad. The Jacobian rows come from m reverse sweeps recorded on the
/// tape. The dominant right singular vector v is taken from an exact
/// eigendecomposition of the small m×m Gram matrix J·Jᵀ on detached values,
/// and the norm is returned as ‖J v‖, which stays differentiable with
/// respect to everything J depends on. A zero Jacobian yields 0.
Tensor jacobian_2norm(const Tensor& y, const Tensor& x);

/// Convenience form: evaluates `f` on a fresh tape variable holding `x`.
Tensor jacobian_2norm(Tape& tape, const std::function<Tensor(const Tensor&)>& f, const Matrix& x);

/// The m Jacobian row blocks J_k (each B×n), recorded for double backprop.
std::vector<Tensor> jacobian_rows(const Tensor& y, const Tensor& x);

}  // namespace smoothrl::ad
