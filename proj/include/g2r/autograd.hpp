#pragma once

// Minimal reverse-mode automatic differentiation over Tensor<T>.
//
// A Var is a handle to a graph node. Ops build the graph eagerly; backward()
// walks it in reverse topological order. A node only records its inputs when
// at least one of them requires a gradient, so constant-only subgraphs are
// freed as soon as their handles go out of scope.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "g2r/kernels.hpp"
#include "g2r/tensor.hpp"

namespace g2r::ag {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  Tensor<T>& ensure_grad() {
    if (grad.empty() && !value.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value);
  static Var parameter(Tensor<T> value);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() { return node_->ensure_grad(); }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.fill(T(0));
  }
  /// Value of a single-element tensor.
  T item() const { return node_->value[0]; }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Backpropagates from a scalar; gradients accumulate into every leaf that
/// requires them.
template <typename T>
void backward(const Var<T>& root);

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const ConvGeometry& g);

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
                        int stride, int pad, int output_pad);

template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     Activation act);

template <typename T>
Var<T> activation(const Var<T>& x, Activation act);

template <typename T>
Var<T> tanh(const Var<T>& x);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

/// x * mask, mask shaped [1,H,W] and broadcast over channels.
template <typename T>
Var<T> mask(const Var<T>& x, const Tensor<T>& mask);

template <typename T>
Var<T> add_constant(const Var<T>& x, const Tensor<T>& c);

/// Appends constant channels after the channels of x.
template <typename T>
Var<T> concat_constant(const Var<T>& x, const Tensor<T>& extra);

/// Keeps the first `channels` channels.
template <typename T>
Var<T> slice_channels(const Var<T>& x, int channels);

/// Same value, no gradient path.
template <typename T>
Var<T> detach(const Var<T>& x);

/// Scalar sum_i w_i * terms_i.
template <typename T>
Var<T> weighted_sum(std::span<const Var<T>> terms, std::span<const double> weights);

/// Scalar mean |a - b| over every element.
template <typename T>
Var<T> l1(const Var<T>& a, const Var<T>& b);

/// Scalar (1/n) sum_p weight_p * mean_c |a - b|, weight shaped [1,H,W],
/// n = H*W.
template <typename T>
Var<T> weighted_l1(const Var<T>& a, const Var<T>& b, const Tensor<T>& weight);

/// Scalar 0.5 * mean((x - target)^2).
template <typename T>
Var<T> half_mse_to(const Var<T>& x, double target);

}  // namespace g2r::ag
