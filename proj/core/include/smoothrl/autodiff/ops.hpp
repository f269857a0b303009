#pragma once

#include "smoothrl/autodiff/tensor.hpp"

#include <string_view>

namespace smoothrl::ad {

/// Elementwise functions with closed-form first and second derivatives.
enum class Unary {
  kTanh,
  kElu,       // alpha = 1
  kSoftplus,  // log(1 + exp(x)), overflow-safe
  kLinear,
  kSigmoid,
  kExp,
  kLog,
  kSqrt,  // derivative taken as 0 at x = 0
  kSquare,
  kAbs,  // derivative taken as 0 at x = 0
};

/// Network activations are the subset of Unary used between layers.
enum class Activation { kTanh, kElu, kSoftplus, kLinear };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Scalar evaluation of f, f' or f'' for a unary kind.
double unary_value(Unary kind, int order, double x);

// Products and reductions.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// x·Wᵀ + b for x (batch×in), W (out×in), b (1×out).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// r×c → r×1
Tensor sum_rows(const Tensor& a);
/// r×c → 1×c
Tensor sum_cols(const Tensor& a);

// Elementwise arithmetic. Operands broadcast when one of them is 1×1, 1×c or r×1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);
/// Gradient passes only where lo <= x <= hi.
Tensor clamp(const Tensor& a, double lo, double hi);

// Shape manipulation.
Tensor expand(const Tensor& a, Index rows, Index cols);
/// Sums a broadcast tensor back down to `rows`×`cols`.
Tensor reduce_to(const Tensor& a, Index rows, Index cols);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, Index start, Index count);
/// Inverse of slice_cols: places `a` at column `start` of a zero matrix with `total_cols` columns.
Tensor pad_cols(const Tensor& a, Index start, Index total_cols);
Tensor slice_rows(const Tensor& a, Index start, Index count);
Tensor pad_rows(const Tensor& a, Index start, Index total_rows);

// Elementwise functions.
Tensor unary(const Tensor& a, Unary kind, int order = 0);
Tensor activation(const Tensor& a, Activation kind);
inline Tensor tanh(const Tensor& a) { return unary(a, Unary::kTanh); }
inline Tensor elu(const Tensor& a) { return unary(a, Unary::kElu); }
inline Tensor softplus(const Tensor& a) { return unary(a, Unary::kSoftplus); }
inline Tensor sigmoid(const Tensor& a) { return unary(a, Unary::kSigmoid); }
inline Tensor exp(const Tensor& a) { return unary(a, Unary::kExp); }
inline Tensor log(const Tensor& a) { return unary(a, Unary::kLog); }
inline Tensor sqrt(const Tensor& a) { return unary(a, Unary::kSqrt); }
inline Tensor square(const Tensor& a) { return unary(a, Unary::kSquare); }
inline Tensor abs(const Tensor& a) { return unary(a, Unary::kAbs); }

/// Euclidean norm of each row: r×c → r×1.
Tensor row_norm(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }

double softplus_inverse(double y);

}  // namespace smoothrl::ad
