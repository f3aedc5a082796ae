#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "g2r/autograd.hpp"

namespace g2r::testing {

inline Tensor<double> random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo = -1,
                                    double hi = 1) {
  Tensor<double> t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

/// Relative L2 error between the autodiff gradient of f at `x` and central
/// differences with step h.
inline double gradient_error(const std::function<ag::Var<double>(const ag::Var<double>&)>& f,
                             const Tensor<double>& x, double h = 1e-6) {
  auto p = ag::Var<double>::parameter(x);
  ag::backward(f(p));
  const Tensor<double> g = p.grad();
  Tensor<double> probe = x;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(ag::Var<double>::constant(probe)).item();
    probe[i] = x[i] - h;
    const double down = f(ag::Var<double>::constant(probe)).item();
    probe[i] = x[i];
    const double fd = (up - down) / (2 * h);
    const double ad = g.empty() ? 0.0 : g[i];
    num += (fd - ad) * (fd - ad);
    den += fd * fd;
  }
  // A vanishing gradient (e.g. a bias feeding a normalisation) has no relative scale.
  if (std::sqrt(den) < 1e-8) return std::sqrt(num);
  return std::sqrt(num) / std::sqrt(den);
}

/// Same check against a parameter living inside some model: `loss` reads the
/// parameter's current value.
inline double parameter_gradient_error(ag::Var<double> param,
                                       const std::function<ag::Var<double>()>& loss,
                                       double h = 1e-6) {
  param.zero_grad();
  ag::backward(loss());
  const Tensor<double> g = param.grad();
  Tensor<double>& v = param.mutable_value();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = loss().item();
    v[i] = keep - h;
    const double down = loss().item();
    v[i] = keep;
    const double fd = (up - down) / (2 * h);
    num += (fd - g[i]) * (fd - g[i]);
    den += fd * fd;
  }
  param.zero_grad();
  // A vanishing gradient (e.g. a bias feeding a normalisation) has no relative scale.
  if (std::sqrt(den) < 1e-8) return std::sqrt(num);
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace g2r::testing
