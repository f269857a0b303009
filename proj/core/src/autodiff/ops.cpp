#include "smoothrl/autodiff/ops.hpp"

#include "smoothrl/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace smoothrl::ad {

namespace {

Tape* tape_of(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return t->tape();
  }
  return nullptr;
}

void check_finite(const char* kind, const Matrix& value) {
  if (!std::isfinite(value.sum()) && !value.allFinite()) {
    throw NumericError(std::string(kind) + " produced a non-finite value");
  }
}

// Records `value` as the output of `kind` when any input requires grad. The
// backward closure is only materialized when the node is actually recorded.
template <class Backward>
Tensor make(const char* kind, Matrix value, std::initializer_list<const Tensor*> inputs, Backward&& backward) {
  check_finite(kind, value);
  Tape* tape = tape_of(inputs);
  if (tape == nullptr || !recording_enabled()) return Tensor(std::move(value));
  std::vector<Tensor> in;
  in.reserve(inputs.size());
  for (const Tensor* t : inputs) in.push_back(*t);
  return tape->record(kind, std::move(value), in, BackwardFn(std::forward<Backward>(backward)));
}

Shape broadcast_shape(const char* kind, Shape a, Shape b) {
  auto dim = [&](Index x, Index y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw DimensionError(std::string(kind) + ": cannot broadcast " + to_string(a) + " with " + to_string(b));
  };
  return {dim(a.rows, b.rows), dim(a.cols, b.cols)};
}

// Brings both operands to a common shape, inserting expand nodes as needed.
std::pair<Tensor, Tensor> broadcast(const char* kind, const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape(kind, a.shape(), b.shape());
  return {a.shape() == s ? a : expand(a, s.rows, s.cols), b.shape() == s ? b : expand(b, s.rows, s.cols)};
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const char* unary_name(Unary kind, int order) {
  static const char* names[][3] = {
      {"tanh", "tanh'", "tanh''"},       {"elu", "elu'", "elu''"},
      {"softplus", "softplus'", "softplus''"}, {"linear", "linear'", "linear''"},
      {"sigmoid", "sigmoid'", "sigmoid''"}, {"exp", "exp'", "exp''"},
      {"log", "log'", "log''"},           {"sqrt", "sqrt'", "sqrt''"},
      {"square", "square'", "square''"}, {"abs", "abs'", "abs''"},
  };
  return names[static_cast<int>(kind)][order];
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kElu: return "elu";
    case Activation::kSoftplus: return "softplus";
    case Activation::kLinear: return "linear";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "elu") return Activation::kElu;
  if (name == "softplus") return Activation::kSoftplus;
  if (name == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected tanh|elu|softplus|linear)");
}

namespace {

[[gnu::always_inline]] inline double eval_unary(Unary kind, int order, double x) {
  switch (kind) {
    case Unary::kTanh: {
      const double t = std::tanh(x);
      if (order == 0) return t;
      if (order == 1) return 1.0 - t * t;
      return -2.0 * t * (1.0 - t * t);
    }
    case Unary::kElu:
      if (order == 0) return x > 0.0 ? x : std::expm1(x);
      if (order == 1) return x > 0.0 ? 1.0 : std::exp(x);
      return x > 0.0 ? 0.0 : std::exp(x);
    case Unary::kSoftplus: {
      if (order == 0) return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
      const double s = stable_sigmoid(x);
      if (order == 1) return s;
      return s * (1.0 - s);
    }
    case Unary::kLinear:
      if (order == 0) return x;
      return order == 1 ? 1.0 : 0.0;
    case Unary::kSigmoid: {
      const double s = stable_sigmoid(x);
      if (order == 0) return s;
      if (order == 1) return s * (1.0 - s);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Unary::kExp:
      return std::exp(x);
    case Unary::kLog:
      if (order == 0) return std::log(x);
      if (order == 1) return 1.0 / x;
      return -1.0 / (x * x);
    case Unary::kSqrt:
      if (order == 0) return std::sqrt(x);
      if (x <= 0.0) return 0.0;
      if (order == 1) return 0.5 / std::sqrt(x);
      return -0.25 / (x * std::sqrt(x));
    case Unary::kSquare:
      if (order == 0) return x * x;
      return order == 1 ? 2.0 * x : 2.0;
    case Unary::kAbs:
      if (order == 0) return std::abs(x);
      if (order == 1) return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      return 0.0;
  }
  return 0.0;
}

template <Unary K>
Matrix apply_kind(const Matrix& m, int order) {
  return m.unaryExpr([order](double x) { return eval_unary(K, order, x); });
}

Matrix apply_unary(Unary kind, int order, const Matrix& m) {
  switch (kind) {
    case Unary::kTanh: return apply_kind<Unary::kTanh>(m, order);
    case Unary::kElu: return apply_kind<Unary::kElu>(m, order);
    case Unary::kSoftplus: return apply_kind<Unary::kSoftplus>(m, order);
    case Unary::kLinear: return apply_kind<Unary::kLinear>(m, order);
    case Unary::kSigmoid: return apply_kind<Unary::kSigmoid>(m, order);
    case Unary::kExp: return apply_kind<Unary::kExp>(m, order);
    case Unary::kLog: return apply_kind<Unary::kLog>(m, order);
    case Unary::kSqrt: return apply_kind<Unary::kSqrt>(m, order);
    case Unary::kSquare: return apply_kind<Unary::kSquare>(m, order);
    case Unary::kAbs: return apply_kind<Unary::kAbs>(m, order);
  }
  return m;
}

}  // namespace

double unary_value(Unary kind, int order, double x) { return eval_unary(kind, order, x); }

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw InputError("softplus_inverse needs a positive argument");
  // log(exp(y) - 1) = y + log(1 - exp(-y))
  return y + std::log(-std::expm1(-y));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  Matrix value = a.value() * b.value();
  return make("matmul", std::move(value), {&a, &b}, [a, b](const Tensor& g, std::span<const bool> need) {
    std::vector<Tensor> out(2);
    if (need[0]) out[0] = matmul(g, transpose(b));
    if (need[1]) out[1] = matmul(transpose(a), g);
    return out;
  });
}

Tensor transpose(const Tensor& a) {
  Matrix value = a.value().transpose();
  return make("transpose", std::move(value), {&a},
              [](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{transpose(g)}; });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.cols() != weight.cols() || bias.rows() != 1 || bias.cols() != weight.rows()) {
    throw DimensionError("linear: input " + to_string(x.shape()) + ", weight " + to_string(weight.shape()) +
                         ", bias " + to_string(bias.shape()));
  }
  Matrix value = x.value() * weight.value().transpose();
  value.rowwise() += bias.value().row(0);
  return make("linear", std::move(value), {&x, &weight, &bias},
              [x, weight](const Tensor& g, std::span<const bool> need) {
                std::vector<Tensor> out(3);
                if (need[0]) out[0] = matmul(g, weight);
                if (need[1]) out[1] = matmul(transpose(g), x);
                if (need[2]) out[2] = sum_cols(g);
                return out;
              });
}

Tensor sum(const Tensor& a) {
  Matrix value = Matrix::Constant(1, 1, a.value().sum());
  const Index r = a.rows(), c = a.cols();
  return make("sum", std::move(value), {&a},
              [r, c](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{expand(g, r, c)}; });
}

Tensor mean(const Tensor& a) {
  if (a.value().size() == 0) throw DimensionError("mean of an empty tensor");
  const double n = static_cast<double>(a.value().size());
  Matrix value = Matrix::Constant(1, 1, a.value().sum() / n);
  const Index r = a.rows(), c = a.cols();
  return make("mean", std::move(value), {&a}, [r, c, n](const Tensor& g, std::span<const bool>) {
    return std::vector<Tensor>{scale(expand(g, r, c), 1.0 / n)};
  });
}

Tensor sum_rows(const Tensor& a) {
  Matrix value = a.value().rowwise().sum();
  const Index r = a.rows(), c = a.cols();
  return make("sum_rows", std::move(value), {&a},
              [r, c](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{expand(g, r, c)}; });
}

Tensor sum_cols(const Tensor& a) {
  Matrix value = a.value().colwise().sum();
  const Index r = a.rows(), c = a.cols();
  return make("sum_cols", std::move(value), {&a},
              [r, c](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{expand(g, r, c)}; });
}

Tensor expand(const Tensor& a, Index rows, Index cols) {
  const Index r = a.rows(), c = a.cols();
  if ((r != rows && r != 1) || (c != cols && c != 1)) {
    throw DimensionError("expand: cannot expand " + to_string(a.shape()) + " to " + to_string({rows, cols}));
  }
  if (r == rows && c == cols) return a;
  Matrix value = a.value().replicate(rows / r, cols / c);
  return make("expand", std::move(value), {&a},
              [r, c](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{reduce_to(g, r, c)}; });
}

Tensor reduce_to(const Tensor& a, Index rows, Index cols) {
  const Index r = a.rows(), c = a.cols();
  if ((rows != r && rows != 1) || (cols != c && cols != 1)) {
    throw DimensionError("reduce_to: cannot reduce " + to_string(a.shape()) + " to " + to_string({rows, cols}));
  }
  if (r == rows && c == cols) return a;
  Matrix value;
  if (rows == 1 && cols == 1) {
    value = Matrix::Constant(1, 1, a.value().sum());
  } else if (rows == 1) {
    value = a.value().colwise().sum();
  } else {
    value = a.value().rowwise().sum();
  }
  return make("reduce_to", std::move(value), {&a},
              [r, c](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{expand(g, r, c)}; });
}

Tensor add(const Tensor& a_in, const Tensor& b_in) {
  if (a_in.shape() != b_in.shape()) {
    auto [a, b] = broadcast("add", a_in, b_in);
    return add(a, b);
  }
  Matrix value = a_in.value() + b_in.value();
  return make("add", std::move(value), {&a_in, &b_in},
              [](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{g, g}; });
}

Tensor sub(const Tensor& a_in, const Tensor& b_in) {
  if (a_in.shape() != b_in.shape()) {
    auto [a, b] = broadcast("sub", a_in, b_in);
    return sub(a, b);
  }
  Matrix value = a_in.value() - b_in.value();
  return make("sub", std::move(value), {&a_in, &b_in}, [](const Tensor& g, std::span<const bool> need) {
    std::vector<Tensor> out(2);
    out[0] = g;
    if (need[1]) out[1] = neg(g);
    return out;
  });
}

Tensor mul(const Tensor& a_in, const Tensor& b_in) {
  if (a_in.shape() != b_in.shape()) {
    auto [a, b] = broadcast("mul", a_in, b_in);
    return mul(a, b);
  }
  Matrix value = a_in.value().cwiseProduct(b_in.value());
  return make("mul", std::move(value), {&a_in, &b_in},
              [a = a_in, b = b_in](const Tensor& g, std::span<const bool> need) {
                std::vector<Tensor> out(2);
                if (need[0]) out[0] = mul(g, b);
                if (need[1]) out[1] = mul(g, a);
                return out;
              });
}

Tensor div(const Tensor& a_in, const Tensor& b_in) {
  if (a_in.shape() != b_in.shape()) {
    auto [a, b] = broadcast("div", a_in, b_in);
    return div(a, b);
  }
  Matrix value = a_in.value().cwiseQuotient(b_in.value());
  return make("div", std::move(value), {&a_in, &b_in},
              [a = a_in, b = b_in](const Tensor& g, std::span<const bool> need) {
                std::vector<Tensor> out(2);
                if (need[0]) out[0] = div(g, b);
                if (need[1]) out[1] = neg(div(mul(g, a), mul(b, b)));
                return out;
              });
}

Tensor minimum(const Tensor& a_in, const Tensor& b_in) {
  if (a_in.shape() != b_in.shape()) {
    auto [a, b] = broadcast("minimum", a_in, b_in);
    return minimum(a, b);
  }
  Matrix pick_a = (a_in.value().array() <= b_in.value().array()).cast<double>().matrix();
  Matrix value = a_in.value().cwiseMin(b_in.value());
  return make("minimum", std::move(value), {&a_in, &b_in},
              [mask = Tensor(std::move(pick_a))](const Tensor& g, std::span<const bool> need) {
                std::vector<Tensor> out(2);
                if (need[0]) out[0] = mul(g, mask);
                if (need[1]) out[1] = sub(g, mul(g, mask));
                return out;
              });
}

Tensor scale(const Tensor& a, double s) {
  Matrix value = a.value() * s;
  return make("scale", std::move(value), {&a},
              [s](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{scale(g, s)}; });
}

Tensor add_scalar(const Tensor& a, double s) {
  Matrix value = a.value().array() + s;
  return make("add_scalar", std::move(value), {&a},
              [](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{g}; });
}

Tensor neg(const Tensor& a) {
  Matrix value = -a.value();
  return make("neg", std::move(value), {&a},
              [](const Tensor& g, std::span<const bool>) { return std::vector<Tensor>{neg(g)}; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  Matrix inside = ((a.value().array() >= lo) && (a.value().array() <= hi)).cast<double>().matrix();
  Matrix value = a.value().cwiseMax(lo).cwiseMin(hi);
  return make("clamp", std::move(value), {&a},
              [mask = Tensor(std::move(inside))](const Tensor& g, std::span<const bool>) {
                return std::vector<Tensor>{mul(g, mask)};
              });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix value(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const auto& p : parts) {
    value.middleCols(at, p.cols()) = p.value();
    offsets.push_back(at);
    at += p.cols();
  }
  check_finite("concat_cols", value);
  Tape* tape = nullptr;
  for (const auto& p : parts) {
    if (p.requires_grad()) tape = p.tape();
  }
  if (tape == nullptr || !recording_enabled()) return Tensor(std::move(value));
  std::vector<Index> widths;
  for (const auto& p : parts) widths.push_back(p.cols());
  return tape->record("concat_cols", std::move(value), parts,
                      [offsets, widths](const Tensor& g, std::span<const bool> need) {
                        std::vector<Tensor> out(offsets.size());
                        for (std::size_t i = 0; i < offsets.size(); ++i) {
                          if (need[i]) out[i] = slice_cols(g, offsets[i], widths[i]);
                        }
                        return out;
                      });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no parts");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix value(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const auto& p : parts) {
    value.middleRows(at, p.rows()) = p.value();
    offsets.push_back(at);
    at += p.rows();
  }
  check_finite("concat_rows", value);
  Tape* tape = nullptr;
  for (const auto& p : parts) {
    if (p.requires_grad()) tape = p.tape();
  }
  if (tape == nullptr || !recording_enabled()) return Tensor(std::move(value));
  std::vector<Index> heights;
  for (const auto& p : parts) heights.push_back(p.rows());
  return tape->record("concat_rows", std::move(value), parts,
                      [offsets, heights](const Tensor& g, std::span<const bool> need) {
                        std::vector<Tensor> out(offsets.size());
                        for (std::size_t i = 0; i < offsets.size(); ++i) {
                          if (need[i]) out[i] = slice_rows(g, offsets[i], heights[i]);
                        }
                        return out;
                      });
}

Tensor slice_cols(const Tensor& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
                         to_string(a.shape()));
  }
  Matrix value = a.value().middleCols(start, count);
  const Index total = a.cols();
  return make("slice_cols", std::move(value), {&a}, [start, total](const Tensor& g, std::span<const bool>) {
    return std::vector<Tensor>{pad_cols(g, start, total)};
  });
}

Tensor pad_cols(const Tensor& a, Index start, Index total_cols) {
  if (start < 0 || start + a.cols() > total_cols) throw DimensionError("pad_cols: slice does not fit");
  Matrix value = Matrix::Zero(a.rows(), total_cols);
  value.middleCols(start, a.cols()) = a.value();
  const Index count = a.cols();
  return make("pad_cols", std::move(value), {&a}, [start, count](const Tensor& g, std::span<const bool>) {
    return std::vector<Tensor>{slice_cols(g, start, count)};
  });
}

Tensor slice_rows(const Tensor& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
                         to_string(a.shape()));
  }
  Matrix value = a.value().middleRows(start, count);
  const Index total = a.rows();
  return make("slice_rows", std::move(value), {&a}, [start, total](const Tensor& g, std::span<const bool>) {
    return std::vector<Tensor>{pad_rows(g, start, total)};
  });
}

Tensor pad_rows(const Tensor& a, Index start, Index total_rows) {
  if (start < 0 || start + a.rows() > total_rows) throw DimensionError("pad_rows: slice does not fit");
  Matrix value = Matrix::Zero(total_rows, a.cols());
  value.middleRows(start, a.rows()) = a.value();
  const Index count = a.rows();
  return make("pad_rows", std::move(value), {&a}, [start, count](const Tensor& g, std::span<const bool>) {
    return std::vector<Tensor>{slice_rows(g, start, count)};
  });
}

Tensor unary(const Tensor& a, Unary kind, int order) {
  if (order < 0 || order > 2) throw InputError("unary: derivative order must be 0, 1 or 2");
  Matrix value = apply_unary(kind, order, a.value());
  const char* name = unary_name(kind, order);
  if (kind == Unary::kTanh && order == 0) {
    auto out = std::make_shared<Tensor>();
    Tensor y = make(name, std::move(value), {&a}, [out](const Tensor& g, std::span<const bool>) {
      return std::vector<Tensor>{mul(g, add_scalar(neg(square(*out)), 1.0))};
    });
    *out = y;
    return y;
  }
  return make(name, std::move(value), {&a}, [a, kind, order, name](const Tensor& g, std::span<const bool>) {
    if (order == 2) {
      throw NumericError(std::string("third derivatives are not supported (") + name + ")");
    }
    return std::vector<Tensor>{mul(g, unary(a, kind, order + 1))};
  });
}

Tensor activation(const Tensor& a, Activation kind) {
  switch (kind) {
    case Activation::kTanh: return unary(a, Unary::kTanh);
    case Activation::kElu: return unary(a, Unary::kElu);
    case Activation::kSoftplus: return unary(a, Unary::kSoftplus);
    case Activation::kLinear: return a;
  }
  return a;
}

Tensor row_norm(const Tensor& a) { return sqrt(sum_rows(square(a))); }

}  // namespace smoothrl::ad
