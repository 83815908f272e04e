#include "dacc/autodiff.hpp"

#include <unordered_set>
#include <utility>

#include "dacc/errors.hpp"

namespace dacc {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

template <typename T>
Variable<T> Variable<T>::constant(Tensor4<T> value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Variable(std::move(node));
}

template <typename T>
Variable<T> Variable<T>::parameter(Tensor4<T> value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Variable(std::move(node));
}

template <typename T>
Variable<T> record(Tensor4<T> value, const std::vector<Variable<T>>& inputs, BackwardFn<T> backward) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced in forward pass, shape " + value.shape().to_string());
  }
  using Node = typename Variable<T>::Node;
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->is_leaf = false;
  if (!grad_mode_enabled()) return Variable<T>(std::move(node));

  bool any = false;
  for (const auto& in : inputs) any = any || in.node_->requires_grad;
  if (!any) return Variable<T>(std::move(node));

  node->requires_grad = true;
  node->inputs.reserve(inputs.size());
  for (const auto& in : inputs) node->inputs.push_back(in.node_);
  node->backward = std::move(backward);
  return Variable<T>(std::move(node));
}

namespace {

template <typename Node>
class NodeGradSink final : public GradSink<typename decltype(Node::value)::value_type> {
  using T = typename decltype(Node::value)::value_type;

 public:
  explicit NodeGradSink(Node& node) : node_(node) {}
  Tensor4<T>* grad_for(std::size_t input) override {
    Node& in = *node_.inputs.at(input);
    if (!in.requires_grad) return nullptr;
    if (in.grad.empty()) in.grad = Tensor4<T>(in.value.shape());
    return &in.grad;
  }

 private:
  Node& node_;
};

}  // namespace

template <typename T>
void backward(const Variable<T>& loss) {
  using Node = typename Variable<T>::Node;
  if (!loss.defined()) throw ValidationError("backward called on an undefined variable");
  if (loss.value().size() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + loss.shape().to_string());
  }
  if (!loss.requires_grad()) {
    throw ValidationError("backward called on a loss that does not depend on any parameter");
  }

  // Post-order DFS: every node appears after all of its inputs.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node_.get(), 0);
  visited.insert(loss.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Node& root = *loss.node_;
  if (root.is_leaf && !root.grad.empty()) {
    root.grad[0] += T(1);
  } else {
    root.grad = Tensor4<T>(root.value.shape(), T(1));
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& node = **it;
    if (node.is_leaf) {
      if (!node.grad.empty() && !node.grad.all_finite()) {
        throw NumericError("non-finite gradient for parameter of shape " + node.value.shape().to_string());
      }
      continue;
    }
    if (node.grad.empty() || !node.backward) continue;
    NodeGradSink<Node> sink(node);
    node.backward(node.grad, sink);
    node.grad = Tensor4<T>();
  }
}

template class Variable<float>;
template class Variable<double>;
template Variable<float> record(Tensor4<float>, const std::vector<Variable<float>>&, BackwardFn<float>);
template Variable<double> record(Tensor4<double>, const std::vector<Variable<double>>&, BackwardFn<double>);
template void backward(const Variable<float>&);
template void backward(const Variable<double>&);

}  // namespace dacc
