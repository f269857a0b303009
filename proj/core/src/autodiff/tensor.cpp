#include "smoothrl/autodiff/tensor.hpp"

#include "smoothrl/autodiff/ops.hpp"
#include "smoothrl/error.hpp"

#include <algorithm>

namespace smoothrl::ad {

namespace {
thread_local bool g_recording = true;
}  // namespace

std::string to_string(Shape shape) {
  return "[" + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) + "]";
}

Tensor::Tensor(Matrix value) : value_(std::make_shared<const Matrix>(std::move(value))) {}

Tensor::Tensor(std::shared_ptr<const Matrix> value, Tape* tape, NodeId node)
    : value_(std::move(value)), tape_(node == kNoNode ? nullptr : tape), node_(node) {}

Tensor Tensor::scalar(double v) { return Tensor(Matrix::Constant(1, 1, v)); }
Tensor Tensor::zeros(Index rows, Index cols) { return Tensor(Matrix::Zero(rows, cols)); }
Tensor Tensor::ones(Index rows, Index cols) { return Tensor(Matrix::Ones(rows, cols)); }

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw DimensionError("item() needs a 1x1 tensor, got " + to_string(shape()));
  }
  return (*value_)(0, 0);
}

Tensor Tape::variable(Matrix value) {
  return variable(std::make_shared<const Matrix>(std::move(value)));
}

Tensor Tape::variable(const std::shared_ptr<const Matrix>& value) {
  nodes_.push_back(Node{"leaf", {}, {}});
  return Tensor(value, this, static_cast<NodeId>(nodes_.size() - 1));
}

Tensor Tape::record(const char* kind, Matrix value, std::span<const Tensor> inputs, BackwardFn backward) {
  bool any = false;
  for (const auto& t : inputs) {
    if (t.requires_grad()) {
      if (t.tape() != this) throw InputError(std::string(kind) + ": inputs live on different tapes");
      any = true;
    }
  }
  if (!any || !g_recording) return Tensor(std::move(value));
  Node node{kind, {}, std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const auto& t : inputs) node.inputs.push_back(t.requires_grad() ? *t.node() : kNoNode);
  nodes_.push_back(std::move(node));
  return Tensor(std::make_shared<const Matrix>(std::move(value)), this,
                static_cast<NodeId>(nodes_.size() - 1));
}

NoGradGuard::NoGradGuard() : previous_(g_recording) { g_recording = false; }
NoGradGuard::~NoGradGuard() { g_recording = previous_; }

bool recording_enabled() { return g_recording; }

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs, GradOptions options) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw DimensionError("grad: output must be a scalar, got " + to_string(output.shape()));
  }
  std::vector<Tensor> result(inputs.size());
  if (!output.requires_grad()) {
    for (std::size_t i = 0; i < inputs.size(); ++i) result[i] = Tensor::zeros(inputs[i].rows(), inputs[i].cols());
    return result;
  }
  Tape& tape = *output.tape();
  const NodeId out_id = *output.node();

  // Nodes that depend on at least one requested input; only these need a gradient.
  NodeId lowest = out_id;
  std::vector<char> reaches(out_id + 1, 0);
  for (const auto& in : inputs) {
    if (!in.requires_grad()) continue;
    if (in.tape() != &tape) throw InputError("grad: input lives on a different tape");
    if (*in.node() <= out_id) {
      reaches[*in.node()] = 1;
      lowest = std::min(lowest, *in.node());
    }
  }
  for (NodeId id = lowest; id <= out_id; ++id) {
    if (reaches[id]) continue;
    for (NodeId src : tape.node(id).inputs) {
      if (src != kNoNode && reaches[src]) {
        reaches[id] = 1;
        break;
      }
    }
  }

  std::optional<NoGradGuard> pause;
  if (!options.create_graph) pause.emplace();

  std::vector<char> requested(out_id + 1, 0);
  for (const auto& in : inputs) {
    if (in.requires_grad() && *in.node() <= out_id) requested[*in.node()] = 1;
  }

  std::vector<Tensor> grads(out_id + 1);
  grads[out_id] = Tensor::ones(1, 1);
  for (NodeId id = out_id + 1; id-- > lowest;) {
    if (!reaches[id] || !grads[id].defined()) continue;
    const Node& node = tape.node(id);
    if (!node.backward) continue;
    std::unique_ptr<bool[]> needed(new bool[node.inputs.size()]);
    bool any = false;
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      needed[i] = node.inputs[i] != kNoNode && reaches[node.inputs[i]];
      any = any || needed[i];
    }
    if (!any) continue;
    std::vector<Tensor> in_grads = node.backward(grads[id], std::span<const bool>(needed.get(), node.inputs.size()));
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (!needed[i] || !in_grads[i].defined()) continue;
      Tensor& slot = grads[node.inputs[i]];
      slot = slot.defined() ? add(slot, in_grads[i]) : in_grads[i];
    }
    // Free intermediate gradients as soon as they are consumed.
    if (!requested[id]) grads[id] = Tensor();
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& in = inputs[i];
    if (in.requires_grad() && *in.node() <= out_id && grads[*in.node()].defined()) {
      result[i] = grads[*in.node()];
      if (!options.create_graph) result[i] = result[i].detach();
    } else {
      result[i] = Tensor::zeros(in.rows(), in.cols());
    }
  }
  return result;
}

}  // namespace smoothrl::ad
