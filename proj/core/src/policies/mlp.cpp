#include "smoothrl/policies/mlp.hpp"

#include "smoothrl/error.hpp"

#include <Eigen/QR>

namespace smoothrl::policies {

void MlpSpec::validate() const {
  if (input_dim <= 0 || output_dim <= 0) throw ConfigError("mlp: input and output dims must be positive");
  if (hidden.empty()) throw ConfigError("mlp: hidden layer list must not be empty");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("mlp: hidden widths must be positive");
  }
}

Matrix orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int big = std::max(rows, cols), small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  Matrix out = rows >= cols ? Matrix(q) : Matrix(q.transpose());
  return out * gain;
}

namespace {
std::string layer_name(const std::string& prefix, std::size_t i, const char* what) {
  return prefix + ".l" + std::to_string(i) + "." + what;
}

std::vector<int> widths(const MlpSpec& spec) {
  std::vector<int> w{spec.input_dim};
  w.insert(w.end(), spec.hidden.begin(), spec.hidden.end());
  w.push_back(spec.output_dim);
  return w;
}

void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kLinear:
      return;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      return;
    case Activation::kElu:
      z = z.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
      return;
    case Activation::kSoftplus:
      z = z.unaryExpr([](double v) { return ad::unary_value(ad::Unary::kSoftplus, 0, v); });
      return;
  }
}

ad::Unary unary_of(Activation a) {
  switch (a) {
    case Activation::kTanh: return ad::Unary::kTanh;
    case Activation::kElu: return ad::Unary::kElu;
    case Activation::kSoftplus: return ad::Unary::kSoftplus;
    case Activation::kLinear: break;
  }
  return ad::Unary::kLinear;
}
}  // namespace

Mlp Mlp::create(ParameterStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng, double hidden_gain,
                double output_gain) {
  spec.validate();
  Mlp m;
  m.spec_ = spec;
  const auto w = widths(spec);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const bool last = i + 2 == w.size();
    Layer layer;
    layer.weight = store.add(layer_name(prefix, i, "weight"), orthogonal(w[i + 1], w[i], last ? output_gain : hidden_gain, rng));
    layer.bias = store.add(layer_name(prefix, i, "bias"), Matrix::Zero(1, w[i + 1]));
    m.layers_.push_back(layer);
  }
  return m;
}

Mlp Mlp::attach(const ParameterStore& store, const std::string& prefix, const MlpSpec& spec) {
  spec.validate();
  Mlp m;
  m.spec_ = spec;
  const auto w = widths(spec);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    Layer layer{store.index(layer_name(prefix, i, "weight")), store.index(layer_name(prefix, i, "bias"))};
    const Matrix& W = store.value(layer.weight);
    if (W.rows() != w[i + 1] || W.cols() != w[i] || store.value(layer.bias).cols() != w[i + 1]) {
      throw DimensionError(prefix + " layer " + std::to_string(i) + ": stored shape " +
                           ad::to_string({W.rows(), W.cols()}) + " does not match the spec");
    }
    m.layers_.push_back(layer);
  }
  return m;
}

Tensor Mlp::forward(const Bound& p, const Tensor& x) const {
  std::vector<Tensor> weights;
  for (const auto& l : layers_) weights.push_back(p[l.weight]);
  return forward_with(p, x, weights);
}

Tensor Mlp::forward_with(const Bound& p, const Tensor& x, std::span<const Tensor> weights) const {
  if (x.cols() != spec_.input_dim) {
    throw DimensionError("mlp: expected input width " + std::to_string(spec_.input_dim) + ", got " +
                         ad::to_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!weights[i].value().allFinite() || !p[layers_[i].bias].value().allFinite()) {
      throw NumericError("non-finite parameters in layer " + std::to_string(i));
    }
    h = ad::linear(h, weights[i], p[layers_[i].bias]);
    h = ad::activation(h, i + 1 == layers_.size() ? spec_.output_activation : spec_.activation);
  }
  return h;
}

Matrix Mlp::evaluate(const ParameterStore& store, const Matrix& x) const {
  std::vector<const Matrix*> weights;
  weights.reserve(layers_.size());
  for (const auto& l : layers_) weights.push_back(&store.value(l.weight));
  return evaluate_with(store, x, weights);
}

Matrix Mlp::evaluate_with(const ParameterStore& store, const Matrix& x, std::span<const Matrix* const> weights) const {
  if (x.cols() != spec_.input_dim) {
    throw DimensionError("mlp: expected input width " + std::to_string(spec_.input_dim) + ", got " +
                         ad::to_string({x.rows(), x.cols()}));
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!weights[i]->allFinite() || !store.value(layers_[i].bias).allFinite()) {
      throw NumericError("non-finite parameters in layer " + std::to_string(i));
    }
    Matrix z = h * weights[i]->transpose();
    z.rowwise() += store.value(layers_[i].bias).row(0);
    apply_activation(z, i + 1 == layers_.size() ? spec_.output_activation : spec_.activation);
    h = std::move(z);
  }
  return h;
}

Matrix Mlp::input_jacobian(const ParameterStore& store, const Matrix& x_row) const {
  Matrix h = x_row;
  Matrix jac = Matrix::Identity(spec_.input_dim, spec_.input_dim);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Matrix& W = store.value(layers_[i].weight);
    Matrix z = h * W.transpose();
    z.rowwise() += store.value(layers_[i].bias).row(0);
    const Activation act = i + 1 == layers_.size() ? spec_.output_activation : spec_.activation;
    jac = W * jac;
    const ad::Unary u = unary_of(act);
    for (Eigen::Index r = 0; r < jac.rows(); ++r) jac.row(r) *= ad::unary_value(u, 1, z(0, r));
    apply_activation(z, act);
    h = std::move(z);
  }
  return jac;
}

void Mlp::check_finite(const ParameterStore& store) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!store.value(layers_[i].weight).allFinite() || !store.value(layers_[i].bias).allFinite()) {
      throw NumericError("non-finite parameters in layer " + std::to_string(i));
    }
  }
}

}  // namespace smoothrl::policies
