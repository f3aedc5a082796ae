#include "g2r/autograd.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace g2r::ag {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<NodePtr<T>> inputs,
                   std::function<void(Node<T>&)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->leaf = false;
  bool any = false;
  for (const auto& in : inputs) any = any || (in && in->requires_grad);
  if (any) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(fn);
  }
  return Var<T>(std::move(node));
}

template <typename T>
bool wants(const NodePtr<T>& n) {
  return n && n->requires_grad;
}

template <typename T>
Tensor<T> scalar(double v) {
  Tensor<T> t({1});
  t[0] = static_cast<T>(v);
  return t;
}

template <typename T>
void check_mask_shape(const Tensor<T>& x, const Tensor<T>& m, const char* what) {
  if (m.rank() != 3 || m.channels() != 1 || m.height() != x.height() || m.width() != x.width()) {
    throw std::invalid_argument(std::string(what) + ": mask " + shape_string(m.shape()) +
                                " does not match image " + shape_string(x.shape()));
  }
}

}  // namespace

template <typename T>
Var<T> Var<T>::constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return Var<T>(std::move(node));
}

template <typename T>
Var<T> Var<T>::parameter(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var<T>(std::move(node));
}

template <typename T>
void backward(const Var<T>& root) {
  if (root.value().size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  if (!root.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node().get(), 0}};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child && child->requires_grad && !child->leaf && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
    // Intermediate gradients are dead once propagated.
    node->grad = Tensor<T>();
  }
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const ConvGeometry& g) {
  const Tensor<T> empty;
  const Tensor<T>& b = bias.defined() ? bias.value() : empty;
  auto xn = x.node();
  auto wn = weight.node();
  auto bn = bias.node();
  return make_result<T>(kernels::conv2d(x.value(), weight.value(), b, g), {xn, wn, bn},
                        [xn, wn, bn, g](Node<T>& self) {
                          kernels::conv2d_backward(xn->value, wn->value, self.grad, g,
                                                   wants(xn) ? &xn->ensure_grad() : nullptr,
                                                   wants(wn) ? &wn->ensure_grad() : nullptr,
                                                   wants(bn) ? &bn->ensure_grad() : nullptr);
                        });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
                        int stride, int pad, int output_pad) {
  const Tensor<T> empty;
  const Tensor<T>& b = bias.defined() ? bias.value() : empty;
  auto xn = x.node();
  auto wn = weight.node();
  auto bn = bias.node();
  const int k = weight.value().dim(2);
  return make_result<T>(
      kernels::conv_transpose2d(x.value(), weight.value(), b, k, stride, pad, output_pad),
      {xn, wn, bn}, [xn, wn, bn, stride, pad](Node<T>& self) {
        kernels::conv_transpose2d_backward(xn->value, wn->value, self.grad, stride, pad,
                                           wants(xn) ? &xn->ensure_grad() : nullptr,
                                           wants(wn) ? &wn->ensure_grad() : nullptr,
                                           wants(bn) ? &bn->ensure_grad() : nullptr);
      });
}

template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     Activation act) {
  auto stats = std::make_shared<kernels::NormStats>();
  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  Tensor<T> y = kernels::instance_norm(x.value(), gamma.value(), beta.value(), act, stats.get());
  return make_result<T>(std::move(y), {xn, gn, bn}, [xn, gn, bn, act, stats](Node<T>& self) {
    kernels::instance_norm_backward(xn->value, gn->value, self.value, self.grad, act, *stats,
                                    wants(xn) ? &xn->ensure_grad() : nullptr,
                                    wants(gn) ? &gn->ensure_grad() : nullptr,
                                    wants(bn) ? &bn->ensure_grad() : nullptr);
  });
}

template <typename T>
Var<T> activation(const Var<T>& x, Activation act) {
  if (act == Activation::kNone) return x;
  const T slope = act == Activation::kRelu ? T(0) : static_cast<T>(kLeakySlope);
  Tensor<T> y(x.value().shape());
  const std::size_t n = y.size();
  const T* in = x.value().data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = in[i] > T(0) ? in[i] : slope * in[i];
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn, slope](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    const std::size_t n = dx.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] += self.value[i] > T(0) ? self.grad[i] : slope * self.grad[i];
    }
  });
}

template <typename T>
Var<T> tanh(const Var<T>& x) {
  Tensor<T> y(x.value().shape());
  const std::size_t n = y.size();
  const T* in = x.value().data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(in[i]);
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    const std::size_t n = dx.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] += self.grad[i] * (T(1) - self.value[i] * self.value[i]);
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor<T> y = a.value();
  const std::size_t n = y.size();
  const T* bv = b.value().data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] += bv[i];
  auto an = a.node();
  auto bn = b.node();
  return make_result<T>(std::move(y), {an, bn}, [an, bn](Node<T>& self) {
    for (const auto& in : {an, bn}) {
      if (!wants(in)) continue;
      Tensor<T>& d = in->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> mask(const Var<T>& x, const Tensor<T>& m) {
  check_mask_shape(x.value(), m, "mask");
  Tensor<T> y = x.value();
  const std::size_t plane = y.plane_size();
  for (int c = 0; c < y.channels(); ++c) {
    T* p = y.plane(c);
    for (std::size_t i = 0; i < plane; ++i) p[i] *= m[i];
  }
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn, m](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    const std::size_t plane = dx.plane_size();
    for (int c = 0; c < dx.channels(); ++c) {
      T* d = dx.plane(c);
      const T* g = self.grad.plane(c);
      for (std::size_t i = 0; i < plane; ++i) d[i] += g[i] * m[i];
    }
  });
}

template <typename T>
Var<T> add_constant(const Var<T>& x, const Tensor<T>& c) {
  require_same_shape(x.value(), c, "add_constant");
  Tensor<T> y = x.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c[i];
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
  });
}

template <typename T>
Var<T> concat_constant(const Var<T>& x, const Tensor<T>& extra) {
  const Tensor<T>& v = x.value();
  if (extra.rank() != 3 || extra.height() != v.height() || extra.width() != v.width()) {
    throw std::invalid_argument("concat_constant: spatial size mismatch");
  }
  Tensor<T> y = Tensor<T>::image(v.channels() + extra.channels(), v.height(), v.width());
  std::copy(v.data(), v.data() + v.size(), y.data());
  std::copy(extra.data(), extra.data() + extra.size(), y.data() + v.size());
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
  });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int channels) {
  const Tensor<T>& v = x.value();
  if (channels < 1 || channels > v.channels()) {
    throw std::invalid_argument("slice_channels: channel count out of range");
  }
  Tensor<T> y = Tensor<T>::image(channels, v.height(), v.width());
  std::copy(v.data(), v.data() + y.size(), y.data());
  auto xn = x.node();
  return make_result<T>(std::move(y), {xn}, [xn](Node<T>& self) {
    Tensor<T>& dx = xn->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i];
  });
}

template <typename T>
Var<T> detach(const Var<T>& x) {
  return Var<T>::constant(x.value());
}

template <typename T>
Var<T> weighted_sum(std::span<const Var<T>> terms, std::span<const double> weights) {
  if (terms.size() != weights.size()) throw std::invalid_argument("weighted_sum: size mismatch");
  double total = 0;
  std::vector<NodePtr<T>> inputs;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].value().size() != 1) throw std::invalid_argument("weighted_sum: non-scalar term");
    total += weights[i] * static_cast<double>(terms[i].item());
    inputs.push_back(terms[i].node());
  }
  std::vector<double> w(weights.begin(), weights.end());
  auto captured = inputs;
  return make_result<T>(scalar<T>(total), std::move(inputs), [captured, w](Node<T>& self) {
    for (std::size_t i = 0; i < captured.size(); ++i) {
      if (wants(captured[i]) && w[i] != 0.0) {
        captured[i]->ensure_grad()[0] += static_cast<T>(w[i]) * self.grad[0];
      }
    }
  });
}

template <typename T>
Var<T> l1(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.value(), b.value(), "l1");
  const std::size_t n = a.value().size();
  double s = 0;
  const T* av = a.value().data();
  const T* bv = b.value().data();
#pragma omp parallel for reduction(+ : s) schedule(static)
  for (std::size_t i = 0; i < n; ++i) s += std::abs(static_cast<double>(av[i]) - bv[i]);
  auto an = a.node();
  auto bn = b.node();
  return make_result<T>(scalar<T>(s / static_cast<double>(n)), {an, bn}, [an, bn](Node<T>& self) {
    const std::size_t n = an->value.size();
    const T scale = self.grad[0] / static_cast<T>(n);
    for (int side = 0; side < 2; ++side) {
      const auto& target = side == 0 ? an : bn;
      if (!wants(target)) continue;
      const T sign = side == 0 ? T(1) : T(-1);
      Tensor<T>& d = target->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const T diff = an->value[i] - bn->value[i];
        const T s = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
        d[i] += sign * scale * s;
      }
    }
  });
}

template <typename T>
Var<T> weighted_l1(const Var<T>& a, const Var<T>& b, const Tensor<T>& weight) {
  require_same_shape(a.value(), b.value(), "weighted_l1");
  check_mask_shape(a.value(), weight, "weighted_l1");
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  const std::size_t plane = av.plane_size();
  const int channels = av.channels();
  double s = 0;
  for (int c = 0; c < channels; ++c) {
    const T* pa = av.plane(c);
    const T* pb = bv.plane(c);
    for (std::size_t i = 0; i < plane; ++i) {
      s += weight[i] * std::abs(static_cast<double>(pa[i]) - pb[i]);
    }
  }
  const double norm = static_cast<double>(plane) * channels;
  auto an = a.node();
  auto bn = b.node();
  return make_result<T>(scalar<T>(s / norm), {an, bn}, [an, bn, weight, norm](Node<T>& self) {
    const std::size_t plane = an->value.plane_size();
    const T scale = static_cast<T>(self.grad[0] / norm);
    for (int side = 0; side < 2; ++side) {
      const auto& target = side == 0 ? an : bn;
      if (!wants(target)) continue;
      const T sign = side == 0 ? T(1) : T(-1);
      Tensor<T>& d = target->ensure_grad();
      for (int c = 0; c < an->value.channels(); ++c) {
        const T* pa = an->value.plane(c);
        const T* pb = bn->value.plane(c);
        T* pd = d.plane(c);
        for (std::size_t i = 0; i < plane; ++i) {
          const T diff = pa[i] - pb[i];
          const T s = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
          pd[i] += sign * scale * weight[i] * s;
        }
      }
    }
  });
}

template <typename T>
Var<T> half_mse_to(const Var<T>& x, double target) {
  const std::size_t n = x.value().size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x.value()[i] - target;
    s += d * d;
  }
  auto xn = x.node();
  return make_result<T>(scalar<T>(0.5 * s / static_cast<double>(n)), {xn},
                        [xn, target](Node<T>& self) {
                          Tensor<T>& d = xn->ensure_grad();
                          const std::size_t n = d.size();
                          const T scale = self.grad[0] / static_cast<T>(n);
                          for (std::size_t i = 0; i < n; ++i) {
                            d[i] += scale * (xn->value[i] - static_cast<T>(target));
                          }
                        });
}

#define G2R_INSTANTIATE(T)                                                                     \
  template class Var<T>;                                                                        \
  template void backward(const Var<T>&);                                                        \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvGeometry&);     \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int, int); \
  template Var<T> instance_norm(const Var<T>&, const Var<T>&, const Var<T>&, Activation);       \
  template Var<T> activation(const Var<T>&, Activation);                                        \
  template Var<T> tanh(const Var<T>&);                                                          \
  template Var<T> add(const Var<T>&, const Var<T>&);                                            \
  template Var<T> mask(const Var<T>&, const Tensor<T>&);                                        \
  template Var<T> add_constant(const Var<T>&, const Tensor<T>&);                                \
  template Var<T> concat_constant(const Var<T>&, const Tensor<T>&);                             \
  template Var<T> slice_channels(const Var<T>&, int);                                           \
  template Var<T> detach(const Var<T>&);                                                        \
  template Var<T> weighted_sum(std::span<const Var<T>>, std::span<const double>);               \
  template Var<T> l1(const Var<T>&, const Var<T>&);                                             \
  template Var<T> weighted_l1(const Var<T>&, const Var<T>&, const Tensor<T>&);                  \
  template Var<T> half_mse_to(const Var<T>&, double);

G2R_INSTANTIATE(float)
G2R_INSTANTIATE(double)
#undef G2R_INSTANTIATE

}  // namespace g2r::ag
