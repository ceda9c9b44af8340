#include "fga/numerics/tensor.hpp"

#include <unordered_set>

namespace fga::nn {

template <typename T>
void Tensor<T>::Node::accumulate(const Array<T>& g) {
  if (!requires_grad) return;
  if (grad.empty()) {
    grad = g;
  } else {
    grad += g;
  }
}

template <typename T>
Tensor<T>::Tensor(Array<T> value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::from_op(Array<T> value, std::vector<Tensor> parents, BackwardFn backward) {
  Tensor out(std::move(value), false);
  for (const auto& p : parents) {
    if (p.requires_grad()) {
      out.node_->requires_grad = true;
      break;
    }
  }
  if (out.node_->requires_grad) {
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

template <typename T>
const Array<T>& Tensor<T>::grad() const {
  if (node_->grad.empty()) node_->grad = Array<T>(node_->value.shape(), T{0});
  return node_->grad;
}

template <typename T>
void Tensor<T>::backward() const {
  if (node_->value.numel() != 1) {
    throw ShapeError("backward() needs a single-element output, got " +
                     shape_str(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order of the sub-graph that
  // requires gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients start fresh; leaves keep accumulating.
  for (Node* n : order) {
    if (n->backward) n->grad = Array<T>();
  }
  node_->accumulate(Array<T>(node_->value.shape(), T{1}));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace fga::nn
