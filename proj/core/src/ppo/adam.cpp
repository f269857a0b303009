#include "smoothrl/ppo/adam.hpp"

#include "smoothrl/error.hpp"

#include <cmath>

namespace smoothrl::ppo {

Adam::Adam(const ad::ParameterStore& store, double learning_rate, double beta1, double beta2, double epsilon)
    : indices_(store.trainable_indices()), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (std::size_t i : indices_) {
    m_.push_back(ad::Matrix::Zero(store.value(i).rows(), store.value(i).cols()));
    v_.push_back(m_.back());
  }
}

void Adam::step(ad::ParameterStore& store, const std::vector<ad::Matrix>& grads) {
  if (grads.size() != indices_.size()) throw InputError("adam: gradient count does not match parameters");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ / c1;
  const double root_c2 = std::sqrt(c2);
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const ad::Matrix& g = grads[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g.cwiseProduct(g);
    ad::Matrix& p = store.mutable_value(indices_[k]);
    p.array() -= step * m_[k].array() / (v_[k].array().sqrt() / root_c2 + eps_);
  }
}

double clip_global_norm(std::vector<ad::Matrix>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  const double coef = max_norm / (norm + 1e-6);
  if (coef < 1.0) {
    for (auto& g : grads) g *= coef;
  }
  return norm;
}

}  // namespace smoothrl::ppo
