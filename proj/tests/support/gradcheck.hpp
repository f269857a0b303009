#pragma once

#include "oracles.hpp"

#include "smoothrl/autodiff/ops.hpp"

#include <functional>
#include <string>
#include <vector>

namespace smoothrl::testing {

using OpFn = std::function<ad::Tensor(const std::vector<ad::Tensor>&)>;

struct OpCase {
  std::string name;
  OpFn op;
  /// Generates the op's inputs for one random case.
  std::function<std::vector<Matrix>(std::mt19937_64&)> inputs;
};

/// Reverse-mode gradient of sum(op(x) ⊙ R) for a random projection R,
/// compared against central differences. Returns the worst relative error.
inline double gradient_error(const OpCase& c, std::mt19937_64& rng) {
  const std::vector<Matrix> xs = c.inputs(rng);
  ad::Tape tape;
  std::vector<ad::Tensor> vars;
  for (const auto& x : xs) vars.push_back(tape.variable(x));
  const ad::Tensor out = c.op(vars);
  const Matrix proj = random_matrix(rng, out.rows(), out.cols(), -1.0, 1.0);
  const ad::Tensor loss = ad::sum(ad::mul(out, ad::Tensor(proj)));
  const auto grads = ad::grad(loss, std::span<const ad::Tensor>(vars));

  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto f = [&](const Matrix& xi) {
      std::vector<ad::Tensor> consts;
      for (std::size_t j = 0; j < xs.size(); ++j) consts.emplace_back(j == i ? xi : xs[j]);
      return c.op(consts).value().cwiseProduct(proj).sum();
    };
    worst = std::max(worst, max_relative_error(grads[i].value(), finite_difference(f, xs[i])));
  }
  return worst;
}

inline std::vector<OpCase> differentiable_op_cases() {
  using ad::Tensor;
  auto shapes = [](std::vector<std::pair<int, int>> dims, double lo = -2.0, double hi = 2.0) {
    return [dims, lo, hi](std::mt19937_64& rng) {
      std::vector<Matrix> out;
      for (auto [r, c] : dims) out.push_back(random_matrix(rng, r, c, lo, hi));
      return out;
    };
  };
  // Denominators bounded away from zero, with random sign.
  auto away_from_zero = [](std::mt19937_64& rng) {
    Matrix num = random_matrix(rng, 3, 4);
    Matrix den = random_matrix(rng, 3, 4, 0.5, 2.0);
    std::bernoulli_distribution flip(0.5);
    for (Eigen::Index i = 0; i < den.size(); ++i)
      if (flip(rng)) den.data()[i] = -den.data()[i];
    return std::vector<Matrix>{num, den};
  };
  using V = std::vector<Tensor>;
  std::vector<OpCase> cases = {
      {"matmul", [](const V& v) { return ad::matmul(v[0], v[1]); }, shapes({{3, 4}, {4, 2}})},
      {"transpose", [](const V& v) { return ad::transpose(v[0]); }, shapes({{3, 5}})},
      {"linear", [](const V& v) { return ad::linear(v[0], v[1], v[2]); }, shapes({{5, 3}, {4, 3}, {1, 4}})},
      {"sum", [](const V& v) { return ad::sum(v[0]); }, shapes({{3, 4}})},
      {"mean", [](const V& v) { return ad::mean(v[0]); }, shapes({{3, 4}})},
      {"sum_rows", [](const V& v) { return ad::sum_rows(v[0]); }, shapes({{3, 4}})},
      {"sum_cols", [](const V& v) { return ad::sum_cols(v[0]); }, shapes({{3, 4}})},
      {"add", [](const V& v) { return ad::add(v[0], v[1]); }, shapes({{3, 4}, {3, 4}})},
      {"add_row_broadcast", [](const V& v) { return ad::add(v[0], v[1]); }, shapes({{3, 4}, {1, 4}})},
      {"add_col_broadcast", [](const V& v) { return ad::add(v[0], v[1]); }, shapes({{3, 1}, {3, 4}})},
      {"sub", [](const V& v) { return ad::sub(v[0], v[1]); }, shapes({{3, 4}, {1, 1}})},
      {"mul", [](const V& v) { return ad::mul(v[0], v[1]); }, shapes({{3, 4}, {3, 4}})},
      {"mul_broadcast", [](const V& v) { return ad::mul(v[0], v[1]); }, shapes({{3, 4}, {3, 1}})},
      {"div", [](const V& v) { return ad::div(v[0], v[1]); }, away_from_zero},
      {"minimum", [](const V& v) { return ad::minimum(v[0], v[1]); }, shapes({{3, 4}, {3, 4}})},
      {"scale", [](const V& v) { return ad::scale(v[0], -1.7); }, shapes({{3, 4}})},
      {"add_scalar", [](const V& v) { return ad::add_scalar(v[0], 0.3); }, shapes({{3, 4}})},
      {"neg", [](const V& v) { return ad::neg(v[0]); }, shapes({{3, 4}})},
      {"clamp", [](const V& v) { return ad::clamp(v[0], -1.0, 1.0); }, shapes({{3, 4}})},
      {"expand", [](const V& v) { return ad::expand(v[0], 3, 4); }, shapes({{1, 4}})},
      {"reduce_to", [](const V& v) { return ad::reduce_to(v[0], 3, 1); }, shapes({{3, 4}})},
      {"concat_cols", [](const V& v) { return ad::concat_cols(std::span<const Tensor>(v)); },
       shapes({{3, 2}, {3, 1}, {3, 3}})},
      {"concat_rows", [](const V& v) { return ad::concat_rows(std::span<const Tensor>(v)); },
       shapes({{2, 3}, {1, 3}})},
      {"slice_cols", [](const V& v) { return ad::slice_cols(v[0], 1, 2); }, shapes({{3, 4}})},
      {"pad_cols", [](const V& v) { return ad::pad_cols(v[0], 1, 5); }, shapes({{3, 2}})},
      {"slice_rows", [](const V& v) { return ad::slice_rows(v[0], 1, 2); }, shapes({{4, 3}})},
      {"pad_rows", [](const V& v) { return ad::pad_rows(v[0], 2, 5); }, shapes({{2, 3}})},
      {"tanh", [](const V& v) { return ad::tanh(v[0]); }, shapes({{3, 4}})},
      {"elu", [](const V& v) { return ad::elu(v[0]); }, shapes({{3, 4}})},
      {"softplus", [](const V& v) { return ad::softplus(v[0]); }, shapes({{3, 4}})},
      {"sigmoid", [](const V& v) { return ad::sigmoid(v[0]); }, shapes({{3, 4}})},
      {"exp", [](const V& v) { return ad::exp(v[0]); }, shapes({{3, 4}})},
      {"log", [](const V& v) { return ad::log(v[0]); }, shapes({{3, 4}}, 0.1, 2.0)},
      {"sqrt", [](const V& v) { return ad::sqrt(v[0]); }, shapes({{3, 4}}, 0.1, 2.0)},
      {"square", [](const V& v) { return ad::square(v[0]); }, shapes({{3, 4}})},
      {"abs", [](const V& v) { return ad::abs(v[0]); }, shapes({{3, 4}})},
      {"row_norm", [](const V& v) { return ad::row_norm(v[0]); }, shapes({{3, 4}})},
  };
  // First derivatives are differentiable ops in their own right.
  for (auto kind : {ad::Unary::kTanh, ad::Unary::kElu, ad::Unary::kSoftplus, ad::Unary::kSigmoid}) {
    cases.push_back({"d/dx unary " + std::to_string(static_cast<int>(kind)),
                     [kind](const V& v) { return ad::unary(v[0], kind, 1); }, shapes({{3, 4}})});
  }
  return cases;
}

/// Small MLP used for double-backprop checks: x (B×n) → scalar per row.
struct TinyMlp {
  Matrix w1, b1, w2, b2;
  ad::Activation act = ad::Activation::kTanh;

  static TinyMlp random(std::mt19937_64& rng, int in, int width, int out, ad::Activation act) {
    return {random_matrix(rng, width, in, -1.0, 1.0), random_matrix(rng, 1, width, -0.5, 0.5),
            random_matrix(rng, out, width, -1.0, 1.0), random_matrix(rng, 1, out, -0.5, 0.5), act};
  }

  ad::Tensor forward(const ad::Tensor& x, const std::vector<ad::Tensor>& p) const {
    return ad::linear(ad::activation(ad::linear(x, p[0], p[1]), act), p[2], p[3]);
  }

  std::vector<Matrix> params() const { return {w1, b1, w2, b2}; }
};

/// Worst relative error of ∂/∂θ ‖∇_x f(x)‖² (summed over the batch) against
/// finite differences over θ, for a single-output network.
inline double double_backprop_error(const TinyMlp& net, const Matrix& x) {
  auto objective = [&](const std::vector<ad::Tensor>& params, ad::Tape& tape) {
    const ad::Tensor input = tape.variable(x);
    const ad::Tensor y = net.forward(input, params);
    const ad::Tensor gx = ad::grad(ad::sum(y), {input}, {.create_graph = true})[0];
    return ad::sum(ad::square(gx));
  };
  const auto ps = net.params();
  ad::Tape tape;
  std::vector<ad::Tensor> vars;
  for (const auto& p : ps) vars.push_back(tape.variable(p));
  const auto grads = ad::grad(objective(vars, tape), std::span<const ad::Tensor>(vars));

  double worst = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto f = [&](const Matrix& pi) {
      ad::Tape t;
      std::vector<ad::Tensor> vs;
      for (std::size_t j = 0; j < ps.size(); ++j) vs.push_back(t.variable(j == i ? pi : ps[j]));
      return objective(vs, t).item();
    };
    worst = std::max(worst, max_relative_error(grads[i].value(), finite_difference(f, ps[i])));
  }
  return worst;
}

}  // namespace smoothrl::testing
