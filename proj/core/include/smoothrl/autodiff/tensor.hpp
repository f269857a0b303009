#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smoothrl::ad {

/// Dense row-major storage used for every tensor value. Tensors are 2-D;
/// vectors are 1×n rows, scalars are 1×1.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Shape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape shape);

class Tape;

/// Immutable value plus an optional link to the tape node that produced it.
/// A tensor without a node is a constant; a tensor with a node requires grad.
/// The tape must outlive every tensor that refers to it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value);
  Tensor(std::shared_ptr<const Matrix> value, Tape* tape, NodeId node);

  static Tensor scalar(double v);
  static Tensor zeros(Index rows, Index cols);
  static Tensor ones(Index rows, Index cols);

  bool defined() const { return value_ != nullptr; }
  const Matrix& value() const { return *value_; }
  const std::shared_ptr<const Matrix>& storage() const { return value_; }

  Index rows() const { return value_->rows(); }
  Index cols() const { return value_->cols(); }
  Shape shape() const { return {rows(), cols()}; }

  /// Value of a 1×1 tensor.
  double item() const;

  bool requires_grad() const { return node_ != kNoNode; }
  Tape* tape() const { return tape_; }
  std::optional<NodeId> node() const {
    return node_ == kNoNode ? std::nullopt : std::optional<NodeId>(node_);
  }

  /// Same value, cut from the tape.
  Tensor detach() const { return Tensor(value_, nullptr, kNoNode); }

 private:
  std::shared_ptr<const Matrix> value_;
  Tape* tape_ = nullptr;
  NodeId node_ = kNoNode;
};

/// Computes the gradients of a node's inputs given the gradient of its output.
/// `needed[i]` tells whether input i's gradient is wanted; entries for unneeded
/// inputs may be left undefined. Implementations must build their results from
/// differentiable ops so that the backward pass can itself be recorded.
using BackwardFn =
    std::function<std::vector<Tensor>(const Tensor& grad_out, std::span<const bool> needed)>;

struct Node {
  const char* kind = "";
  std::vector<NodeId> inputs;
  BackwardFn backward;
};

/// Append-only record of differentiable operations. Node ids are assigned in
/// creation order, so inputs always precede outputs.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// New leaf that requires grad.
  Tensor variable(Matrix value);
  Tensor variable(const std::shared_ptr<const Matrix>& value);

  /// Appends an op node. `inputs` are the tensors the op read; constants among
  /// them are ignored. When no input requires grad, or recording is paused,
  /// the result is a constant.
  Tensor record(const char* kind, Matrix value, std::span<const Tensor> inputs, BackwardFn backward);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }

 private:
  std::deque<Node> nodes_;
};

/// Pauses tape recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool recording_enabled();

struct GradOptions {
  /// Record the backward pass so the returned gradients can be differentiated again.
  bool create_graph = false;
};

/// Gradients of the scalar `output` with respect to each of `inputs`. Inputs
/// the output does not depend on receive zeros of their shape.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs, GradOptions options = {});

inline std::vector<Tensor> grad(const Tensor& output, std::initializer_list<Tensor> inputs,
                                GradOptions options = {}) {
  return grad(output, std::span<const Tensor>(inputs.begin(), inputs.size()), options);
}

}  // namespace smoothrl::ad
