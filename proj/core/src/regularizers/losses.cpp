#include "smoothrl/regularizers/losses.hpp"

#include "smoothrl/error.hpp"

namespace smoothrl::regularizers {

namespace {
void check_pair(const char* what, const Tensor& s, const Tensor& s_next) {
  if (!s.defined() || s.rows() == 0) throw InputError(std::string(what) + ": empty batch");
  if (s.shape() != s_next.shape()) {
    throw DimensionError(std::string(what) + ": state batches differ, " + ad::to_string(s.shape()) + " vs " +
                         ad::to_string(s_next.shape()));
  }
}
}  // namespace

Tensor mean_distance(const Tensor& a, const Tensor& b) { return ad::mean(ad::row_norm(ad::sub(a, b))); }

Tensor caps_loss(const TensorFn& pi, const Tensor& s, const Tensor& s_next, const Matrix& noise,
                 const CapsConfig& cfg, const Tensor& pi_s) {
  check_pair("caps_loss", s, s_next);
  if (noise.rows() != s.rows() || noise.cols() != s.cols()) throw DimensionError("caps_loss: noise shape mismatch");
  const Tensor a = pi_s.defined() ? pi_s : pi(s);
  const Tensor temporal = mean_distance(a, pi(s_next));
  const Tensor spatial = mean_distance(a, pi(ad::add(s, Tensor(noise))));
  return ad::add(ad::scale(temporal, cfg.lambda_t), ad::scale(spatial, cfg.lambda_s));
}

Tensor caps_loss(const TensorFn& pi, const Tensor& s, const Tensor& s_next, const CapsConfig& cfg, Rng& rng,
                 const Tensor& pi_s) {
  check_pair("caps_loss", s, s_next);
  Matrix noise(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = cfg.sigma * normal(rng);
  return caps_loss(pi, s, s_next, noise, cfg, pi_s);
}

Tensor l2c2_loss(const TensorFn& pi, const TensorFn& value, const Tensor& s, const Tensor& s_next, const Matrix& u,
                 const L2c2Config& cfg, const Tensor& pi_s, const Tensor& v_s) {
  check_pair("l2c2_loss", s, s_next);
  if (u.rows() != s.rows() || u.cols() != s.cols()) throw DimensionError("l2c2_loss: u shape mismatch");
  const Matrix between = s.value() + (s_next.value() - s.value()).cwiseProduct(u);
  const Tensor s_bar(between);
  const Tensor a = pi_s.defined() ? pi_s : pi(s);
  const Tensor v = v_s.defined() ? v_s : value(s);
  const Tensor actor_term = mean_distance(a, pi(s_bar));
  const Tensor value_term = ad::mean(ad::abs(ad::sub(v, value(s_bar))));
  return ad::add(ad::scale(actor_term, cfg.lambda_pi), ad::scale(value_term, cfg.lambda_v));
}

Tensor l2c2_loss(const TensorFn& pi, const TensorFn& value, const Tensor& s, const Tensor& s_next,
                 const L2c2Config& cfg, Rng& rng, const Tensor& pi_s, const Tensor& v_s) {
  check_pair("l2c2_loss", s, s_next);
  Matrix u(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = uniform(rng, -cfg.sigma, cfg.sigma);
  return l2c2_loss(pi, value, s, s_next, u, cfg, pi_s, v_s);
}

Tensor regularization(const MethodSpec& method, const RegularizerBatch& b, Rng& rng) {
  Tensor total;
  auto accumulate = [&](const Tensor& t) { total = total.defined() ? ad::add(total, t) : t; };
  if (method.has(Regularizer::kCaps)) accumulate(caps_loss(b.pi, b.s, b.s_next, method.caps, rng, b.pi_s));
  if (method.has(Regularizer::kL2c2)) {
    accumulate(l2c2_loss(b.pi, b.value, b.s, b.s_next, method.l2c2, rng, b.pi_s, b.v_s));
  }
  if (method.has(Regularizer::kLiuLoss) || method.has(Regularizer::kLipsNetKLoss)) {
    if (!b.arch_penalty.defined()) throw InputError("regularization: architectural penalty missing");
    accumulate(b.arch_penalty);
  }
  return total.defined() ? total : Tensor::zeros(1, 1);
}

Tensor total_loss(const Tensor& rl_loss, const MethodSpec& method, const RegularizerBatch& batch, Rng& rng) {
  if (method.regularizers.empty()) return rl_loss;
  return ad::add(rl_loss, regularization(method, batch, rng));
}

}  // namespace smoothrl::regularizers
