#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dacc/tensor.hpp"

namespace dacc {

template <typename T>
class Variable;

/// Hands out gradient buffers for the inputs of a recorded operation.
/// grad_for(i) is null when input i does not require a gradient.
template <typename T>
class GradSink {
 public:
  virtual ~GradSink() = default;
  virtual Tensor4<T>* grad_for(std::size_t input) = 0;
};

template <typename T>
using BackwardFn = std::function<void(const Tensor4<T>& grad_out, GradSink<T>& sink)>;

/// Handle to a node in the dynamic computation graph. Copies share the node.
///
/// Leaves created with requires_grad=true are parameters: their gradients
/// accumulate across backward() calls until clear_grad().
template <typename T>
class Variable {
 public:
  Variable() = default;

  static Variable constant(Tensor4<T> value);
  static Variable parameter(Tensor4<T> value);

  bool defined() const { return node_ != nullptr; }
  const Tensor4<T>& value() const { return node_->value; }
  /// Direct access for optimizers and checkpoint loading.
  Tensor4<T>& mutable_value() { return node_->value; }
  const Shape4& shape() const { return node_->value.shape(); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  const Tensor4<T>& grad() const { return node_->grad; }
  Tensor4<T>& mutable_grad() { return node_->grad; }
  void clear_grad() { node_->grad = Tensor4<T>(); }

  bool same_node(const Variable& other) const { return node_ == other.node_; }

 private:
  struct Node {
    Tensor4<T> value;
    Tensor4<T> grad;
    bool requires_grad = false;
    bool is_leaf = true;
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardFn<T> backward;
  };

  explicit Variable(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  std::shared_ptr<Node> node_;

  template <typename U>
  friend Variable<U> record(Tensor4<U> value, const std::vector<Variable<U>>& inputs,
                            BackwardFn<U> backward);
  template <typename U>
  friend void backward(const Variable<U>& loss);
};

/// Builds the result of an operation. The backward closure is kept only when
/// gradient recording is enabled and some input requires a gradient.
/// Throws NumericError if `value` contains NaN or Inf.
template <typename T>
Variable<T> record(Tensor4<T> value, const std::vector<Variable<T>>& inputs, BackwardFn<T> backward);

/// Reverse-mode sweep from a scalar loss. Gradients of parameters accumulate.
template <typename T>
void backward(const Variable<T>& loss);

/// Disables graph recording on this thread while alive (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

}  // namespace dacc
