#pragma once

#include "smoothrl/policies/mlp.hpp"

#include <concepts>
#include <string_view>
#include <variant>

namespace smoothrl::policies {

enum class Architecture { kPlain, kLocalSn, kLiu, kLipsNet };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view name);

struct SpectralNormSpec {
  double delta = 1.0;
  int train_iterations = 1;
  int checkpoint_iterations = 20;
};

struct LiuLipschitzSpec {
  /// softplus(c_i) at initialization.
  double c_init_softplus = 10.0;
  double c_loss_weight = 1e-6;
};

struct LipsNetSpec {
  std::vector<int> f_hidden{64, 64};
  Activation f_activation = Activation::kElu;
  std::vector<int> k_hidden{32};
  Activation k_activation = Activation::kTanh;
  double epsilon = 1e-4;
  double k_init = 1.0;
  double k_loss_weight = 0.1;

  void validate() const;
};

/// Output of an actor mean network on a batch.
struct MeanOutput {
  Tensor mean;     // B×act_dim
  Tensor penalty;  // 1×1 weighted architectural loss, constant 0 when none
};

// ---- spectral normalization -------------------------------------------------

/// One or more power-iteration steps on W with persistent vectors u (out×1)
/// and v (1×in); returns the estimate uᵀWv.
double power_iteration(const Matrix& w, Matrix& u, Matrix& v, int iterations);

/// δ·W/σ(W) with σ from power iteration run to convergence; a zero matrix is
/// returned unchanged.
Matrix spectral_normalize(const Matrix& w, double delta = 1.0);

// ---- Liu-Lipschitz ----------------------------------------------------------

/// Scales each row of W by min(1, bound/Σ_j|W_ij|).
Matrix liu_normalize(const Matrix& w, double bound);
Tensor liu_normalize(const Tensor& w, const Tensor& softplus_c);
/// λ·∏ softplus(c_i).
Tensor liu_loss(std::span<const Tensor> c, double weight);

// ---- LipsNet ----------------------------------------------------------------

/// K·f/(‖J_f‖+ε) row by row; `k` is B×1, `f` B×m, `jac_norm` B×1.
Tensor lipsnet_combine(const Tensor& k, const Tensor& f, const Tensor& jac_norm, double epsilon);
/// λ·mean(K).
Tensor lipsnet_k_loss(const Tensor& k, double weight);

// ---- mean networks ----------------------------------------------------------

class PlainMean {
 public:
  PlainMean() = default;
  explicit PlainMean(Mlp net) : net_(std::move(net)) {}

  MeanOutput forward(const Bound& p, const Tensor& x) const;
  Matrix evaluate(const ParameterStore& store, const Matrix& x) const;
  void refresh(ParameterStore&, int) const {}
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
};

/// Plain MLP whose output-layer weight is replaced by δ·W/σ(W); σ = uᵀWv
/// from buffers `<prefix>.sn_u`, `<prefix>.sn_v` that `refresh` advances.
class SpectralNormMean {
 public:
  SpectralNormMean() = default;
  SpectralNormMean(Mlp net, std::size_t u, std::size_t v, SpectralNormSpec spec)
      : net_(std::move(net)), u_(u), v_(v), spec_(spec) {}

  MeanOutput forward(const Bound& p, const Tensor& x) const;
  Matrix evaluate(const ParameterStore& store, const Matrix& x) const;
  /// Runs `iterations` power-iteration steps and stores the new u, v.
  void refresh(ParameterStore& store, int iterations) const;
  const Mlp& net() const { return net_; }
  /// Normalized output weight under the stored u, v.
  Matrix normalized_output_weight(const ParameterStore& store) const;

 private:
  Mlp net_;
  std::size_t u_ = 0, v_ = 0;
  SpectralNormSpec spec_;
};

/// Every layer weight row-normalized by softplus(c_i); c_i stored as
/// `<prefix>.c<i>` (1×1).
class LiuMean {
 public:
  LiuMean() = default;
  LiuMean(Mlp net, std::vector<std::size_t> c, LiuLipschitzSpec spec)
      : net_(std::move(net)), c_(std::move(c)), spec_(spec) {}

  MeanOutput forward(const Bound& p, const Tensor& x) const;
  Matrix evaluate(const ParameterStore& store, const Matrix& x) const;
  void refresh(ParameterStore&, int) const {}
  const Mlp& net() const { return net_; }
  const std::vector<std::size_t>& c_indices() const { return c_; }
  /// ∏ softplus(c_i): the network's ∞-norm Lipschitz bound.
  double lipschitz_bound(const ParameterStore& store) const;

 private:
  Mlp net_;
  std::vector<std::size_t> c_;
  LiuLipschitzSpec spec_;
};

/// y = K(x)·f(x)/(‖J_f(x)‖₂+ε).
class LipsNetMean {
 public:
  LipsNetMean() = default;
  LipsNetMean(Mlp f, Mlp k, LipsNetSpec spec) : f_(std::move(f)), k_(std::move(k)), spec_(std::move(spec)) {}

  MeanOutput forward(const Bound& p, const Tensor& x) const;
  Matrix evaluate(const ParameterStore& store, const Matrix& x) const;
  void refresh(ParameterStore&, int) const {}
  /// K(x) for each row (B×1).
  Matrix lipschitz(const ParameterStore& store, const Matrix& x) const;
  /// K(x)/(‖J_f(x)‖₂+ε) for each row (B×1), so that y = output_scale·f.
  Matrix output_scale(const ParameterStore& store, const Matrix& x) const;
  const Mlp& f_net() const { return f_; }
  const Mlp& k_net() const { return k_; }
  const LipsNetSpec& spec() const { return spec_; }

 private:
  Mlp f_, k_;
  LipsNetSpec spec_;
};

template <class N>
concept MeanNetwork = requires(const N& n, const Bound& b, const Tensor& x, ParameterStore& s, const Matrix& m) {
  { n.forward(b, x) } -> std::same_as<MeanOutput>;
  { n.evaluate(s, m) } -> std::same_as<Matrix>;
  n.refresh(s, 1);
};

static_assert(MeanNetwork<PlainMean>);
static_assert(MeanNetwork<SpectralNormMean>);
static_assert(MeanNetwork<LiuMean>);
static_assert(MeanNetwork<LipsNetMean>);

using MeanNet = std::variant<PlainMean, SpectralNormMean, LiuMean, LipsNetMean>;

}  // namespace smoothrl::policies
