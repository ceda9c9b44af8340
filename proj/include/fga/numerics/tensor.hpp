#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fga/numerics/array.hpp"

namespace fga::nn {

/// Handle to a node in a reverse-mode differentiation graph.
///
/// A Tensor owns its forward value and, once backward() has run, a gradient
/// of the same shape. Copies share the node. Ops never mutate their inputs;
/// each returns a freshly allocated node that remembers how to push its
/// gradient back to its parents. Nodes built only from tensors that do not
/// require gradients keep no backward closure.
template <typename T>
class Tensor {
 public:
  struct Node;
  using BackwardFn = std::function<void(const Node&)>;

  struct Node {
    Array<T> value;
    Array<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward;

    void accumulate(const Array<T>& g);
  };

  Tensor() = default;
  explicit Tensor(Array<T> value, bool requires_grad = false);

  static Tensor constant(Array<T> value) { return Tensor(std::move(value), false); }
  static Tensor parameter(Array<T> value) { return Tensor(std::move(value), true); }

  /// Builds an op result. The node requires grad when any parent does; the
  /// closure is dropped otherwise.
  static Tensor from_op(Array<T> value, std::vector<Tensor> parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Array<T>& value() const { return node_->value; }
  /// Direct access for parameter updates. Do not use on op outputs still
  /// referenced by a live graph.
  Array<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t numel() const { return node_->value.numel(); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient buffer; all zeros when backward has not reached this node.
  const Array<T>& grad() const;
  void zero_grad() { node_->grad = Array<T>(); }

  /// Seeds d(self)/d(self) = 1 and runs the reverse sweep. Self must hold a
  /// single element. Gradients accumulate into leaves across calls.
  void backward() const;

  /// Same value, cut from the graph.
  Tensor detach() const { return Tensor(node_->value, false); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

}  // namespace fga::nn
