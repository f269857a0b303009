#pragma once

#include "smoothrl/autodiff/ops.hpp"
#include "smoothrl/autodiff/parameters.hpp"
#include "smoothrl/rng.hpp"

#include <string>
#include <vector>

namespace smoothrl::policies {

using ad::Activation;
using ad::Matrix;
using ad::ParameterStore;
using ad::Tensor;

struct MlpSpec {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::kTanh;
  Activation output_activation = Activation::kLinear;

  /// Throws ConfigError on non-positive dims or an empty hidden list.
  void validate() const;
};

/// Tensors of a ParameterStore bound to one tape (or all constants when
/// `tape` is null). Indexed like the store.
struct Bound {
  ad::Tape* tape = nullptr;
  std::vector<Tensor> tensors;

  static Bound on(ad::Tape& tape, const ParameterStore& store) { return {&tape, store.bind(tape)}; }
  static Bound constant(const ParameterStore& store) { return {nullptr, store.constants()}; }
  const Tensor& operator[](std::size_t i) const { return tensors[i]; }
};

/// Fills `rows`×`cols` with a (semi-)orthogonal matrix scaled by `gain`.
Matrix orthogonal(int rows, int cols, double gain, Rng& rng);

/// Dense feed-forward network whose weights live in a ParameterStore under
/// `<prefix>.l<i>.weight` (out×in) and `<prefix>.l<i>.bias` (1×out).
class Mlp {
 public:
  struct Layer {
    std::size_t weight;
    std::size_t bias;
  };

  Mlp() = default;
  /// Registers freshly initialized parameters: orthogonal weights with
  /// `hidden_gain` on hidden layers and `output_gain` on the last, zero biases.
  static Mlp create(ParameterStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng,
                    double hidden_gain, double output_gain);
  /// Looks up parameters registered earlier by `create` under the same prefix.
  static Mlp attach(const ParameterStore& store, const std::string& prefix, const MlpSpec& spec);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Tensor forward(const Bound& p, const Tensor& x) const;
  /// Forward pass with `weights[i]` used in place of layer i's stored weight.
  Tensor forward_with(const Bound& p, const Tensor& x, std::span<const Tensor> weights) const;
  /// Same function without a tape.
  Matrix evaluate(const ParameterStore& store, const Matrix& x) const;
  Matrix evaluate_with(const ParameterStore& store, const Matrix& x, std::span<const Matrix* const> weights) const;
  /// Input Jacobian of one sample (output_dim × input_dim).
  Matrix input_jacobian(const ParameterStore& store, const Matrix& x_row) const;

  /// Throws NumericError naming the first layer holding a non-finite value.
  void check_finite(const ParameterStore& store) const;

 private:
  MlpSpec spec_;
  std::vector<Layer> layers_;
};

}  // namespace smoothrl::policies
