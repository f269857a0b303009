#include "smoothrl/policies/architectures.hpp"

#include "smoothrl/autodiff/jacobian.hpp"
#include "smoothrl/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace smoothrl::policies {

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::kPlain: return "plain";
    case Architecture::kLocalSn: return "local_sn";
    case Architecture::kLiu: return "liu";
    case Architecture::kLipsNet: return "lipsnet";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  for (auto a : {Architecture::kPlain, Architecture::kLocalSn, Architecture::kLiu, Architecture::kLipsNet}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "' (plain|local_sn|liu|lipsnet)");
}

void LipsNetSpec::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("lipsnet: epsilon must be > 0");
  if (!(k_init > 0.0)) throw ConfigError("lipsnet: k_init must be > 0");
  if (!(k_loss_weight >= 0.0)) throw ConfigError("lipsnet: k_loss_weight must be >= 0");
  if (f_hidden.empty() || k_hidden.empty()) throw ConfigError("lipsnet: hidden layer lists must not be empty");
}

// ---- spectral normalization -------------------------------------------------

double power_iteration(const Matrix& w, Matrix& u, Matrix& v, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    Matrix nv = u.transpose() * w;
    const double nv_norm = nv.norm();
    if (nv_norm == 0.0) break;
    v = nv / nv_norm;
    Matrix nu = w * v.transpose();
    const double nu_norm = nu.norm();
    if (nu_norm == 0.0) break;
    u = nu / nu_norm;
  }
  return (u.transpose() * w * v.transpose())(0, 0);
}

Matrix spectral_normalize(const Matrix& w, double delta) {
  if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0) return w;
  Rng rng(0x5eed);
  Matrix u(w.rows(), 1);
  for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) = normal(rng);
  u /= u.norm();
  Matrix v = Matrix::Zero(1, w.cols());
  double sigma = power_iteration(w, u, v, 1);
  for (int it = 0; it < 10000; ++it) {
    const double next = power_iteration(w, u, v, 1);
    const bool done = std::abs(next - sigma) <= 1e-15 * std::abs(next);
    sigma = next;
    if (done) break;
  }
  if (sigma == 0.0) return w;
  return w * (delta / sigma);
}

namespace {
// σ = uᵀWv with u, v treated as constants.
Tensor sigma_of(const Tensor& w, const Matrix& u, const Matrix& v) {
  return ad::sum(ad::mul(w, Tensor(Matrix(u * v))));
}
}  // namespace

MeanOutput SpectralNormMean::forward(const Bound& p, const Tensor& x) const {
  std::vector<Tensor> weights;
  for (const auto& l : net_.layers()) weights.push_back(p[l.weight]);
  const Matrix& u = p[u_].value();
  const Matrix& v = p[v_].value();
  Tensor& w = weights.back();
  const Tensor sigma = sigma_of(w, u, v);
  if (sigma.item() != 0.0) w = ad::scale(ad::div(w, sigma), spec_.delta);
  return {net_.forward_with(p, x, weights), Tensor::zeros(1, 1)};
}

Matrix SpectralNormMean::normalized_output_weight(const ParameterStore& store) const {
  const Matrix& w = store.value(net_.layers().back().weight);
  const double sigma = (store.value(u_).transpose() * w * store.value(v_).transpose())(0, 0);
  return sigma == 0.0 ? w : Matrix(w * (spec_.delta / sigma));
}

Matrix SpectralNormMean::evaluate(const ParameterStore& store, const Matrix& x) const {
  const Matrix last = normalized_output_weight(store);
  std::vector<const Matrix*> weights;
  for (const auto& l : net_.layers()) weights.push_back(&store.value(l.weight));
  weights.back() = &last;
  return net_.evaluate_with(store, x, weights);
}

void SpectralNormMean::refresh(ParameterStore& store, int iterations) const {
  Matrix u = store.value(u_);
  Matrix v = store.value(v_);
  power_iteration(store.value(net_.layers().back().weight), u, v, iterations);
  store.set(u_, std::move(u));
  store.set(v_, std::move(v));
}

// ---- Liu-Lipschitz ----------------------------------------------------------

Matrix liu_normalize(const Matrix& w, double bound) {
  Matrix out = w;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double s = w.row(r).cwiseAbs().sum();
    if (s > bound) out.row(r) *= bound / s;
  }
  return out;
}

Tensor liu_normalize(const Tensor& w, const Tensor& softplus_c) {
  const Tensor row_abs = ad::clamp(ad::sum_rows(ad::abs(w)), std::numeric_limits<double>::min(),
                                   std::numeric_limits<double>::infinity());
  const Tensor scale = ad::minimum(Tensor::ones(w.rows(), 1), ad::div(softplus_c, row_abs));
  return ad::mul(w, scale);
}

Tensor liu_loss(std::span<const Tensor> c, double weight) {
  if (c.empty()) throw InputError("liu_loss: empty parameter list");
  Tensor prod = ad::softplus(c[0]);
  for (std::size_t i = 1; i < c.size(); ++i) prod = ad::mul(prod, ad::softplus(c[i]));
  return ad::scale(prod, weight);
}

MeanOutput LiuMean::forward(const Bound& p, const Tensor& x) const {
  std::vector<Tensor> weights;
  std::vector<Tensor> cs;
  for (std::size_t i = 0; i < net_.layers().size(); ++i) {
    cs.push_back(p[c_[i]]);
    weights.push_back(liu_normalize(p[net_.layers()[i].weight], ad::softplus(cs.back())));
  }
  return {net_.forward_with(p, x, weights), liu_loss(cs, spec_.c_loss_weight)};
}

Matrix LiuMean::evaluate(const ParameterStore& store, const Matrix& x) const {
  std::vector<Matrix> normalized;
  normalized.reserve(net_.layers().size());
  for (std::size_t i = 0; i < net_.layers().size(); ++i) {
    const double bound = ad::unary_value(ad::Unary::kSoftplus, 0, store.value(c_[i])(0, 0));
    normalized.push_back(liu_normalize(store.value(net_.layers()[i].weight), bound));
  }
  std::vector<const Matrix*> weights;
  for (const auto& m : normalized) weights.push_back(&m);
  return net_.evaluate_with(store, x, weights);
}

double LiuMean::lipschitz_bound(const ParameterStore& store) const {
  double bound = 1.0;
  for (std::size_t i : c_) bound *= ad::unary_value(ad::Unary::kSoftplus, 0, store.value(i)(0, 0));
  return bound;
}

// ---- LipsNet ----------------------------------------------------------------

Tensor lipsnet_combine(const Tensor& k, const Tensor& f, const Tensor& jac_norm, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("lipsnet: epsilon must be > 0");
  return ad::div(ad::mul(k, f), ad::add_scalar(jac_norm, epsilon));
}

Tensor lipsnet_k_loss(const Tensor& k, double weight) { return ad::scale(ad::mean(k), weight); }

MeanOutput LipsNetMean::forward(const Bound& p, const Tensor& x) const {
  Tensor input = x;
  if (!input.requires_grad()) {
    if (p.tape == nullptr) throw InputError("lipsnet: forward needs a tape to differentiate f");
    input = p.tape->variable(x.storage());
  }
  const Tensor f = f_.forward(p, input);
  const Tensor norm = ad::jacobian_2norm(f, input);
  const Tensor k = k_.forward(p, x);
  return {lipsnet_combine(k, f, norm, spec_.epsilon), lipsnet_k_loss(k, spec_.k_loss_weight)};
}

Matrix LipsNetMean::lipschitz(const ParameterStore& store, const Matrix& x) const { return k_.evaluate(store, x); }

Matrix LipsNetMean::output_scale(const ParameterStore& store, const Matrix& x) const {
  Matrix scale = k_.evaluate(store, x);
  for (Eigen::Index b = 0; b < x.rows(); ++b) {
    const Matrix jac = f_.input_jacobian(store, x.row(b));
    double norm = 0.0;
    if (jac.rows() == 1) {
      norm = jac.norm();
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(jac)};
      norm = svd.singularValues()(0);
    }
    scale(b, 0) /= norm + spec_.epsilon;
  }
  return scale;
}

Matrix LipsNetMean::evaluate(const ParameterStore& store, const Matrix& x) const {
  Matrix f = f_.evaluate(store, x);
  const Matrix scale = output_scale(store, x);
  for (Eigen::Index b = 0; b < x.rows(); ++b) f.row(b) *= scale(b, 0);
  return f;
}

MeanOutput PlainMean::forward(const Bound& p, const Tensor& x) const {
  return {net_.forward(p, x), Tensor::zeros(1, 1)};
}

Matrix PlainMean::evaluate(const ParameterStore& store, const Matrix& x) const { return net_.evaluate(store, x); }

}  // namespace smoothrl::policies
