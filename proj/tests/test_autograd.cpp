#include <doctest.h>

#include <random>

#include "g2r/autograd.hpp"
#include "gradcheck.hpp"

using namespace g2r;
using testing::gradient_error;
using testing::random_tensor;
using V = ag::Var<double>;

namespace {

V energy(const V& y) { return ag::half_mse_to(y, 0.3); }

}  // namespace

TEST_CASE("conv2d gradients") {
  std::mt19937_64 rng(1);
  const auto x = random_tensor({2, 6, 5}, rng);
  const auto w = random_tensor({3, 2, 3, 3}, rng);
  const auto b = random_tensor({3}, rng);
  for (const ConvGeometry g : {ConvGeometry{3, 1, 1, PadMode::kReflect}, ConvGeometry{3, 2, 1, PadMode::kZero},
                               ConvGeometry{3, 1, 0, PadMode::kZero}}) {
    CHECK(gradient_error([&](const V& v) { return energy(ag::conv2d(v, V::constant(w), V::constant(b), g)); }, x) < 1e-6);
    CHECK(gradient_error([&](const V& v) { return energy(ag::conv2d(V::constant(x), v, V::constant(b), g)); }, w) < 1e-6);
    CHECK(gradient_error([&](const V& v) { return energy(ag::conv2d(V::constant(x), V::constant(w), v, g)); }, b) < 1e-6);
  }
}

TEST_CASE("transposed conv gradients") {
  std::mt19937_64 rng(2);
  const auto x = random_tensor({3, 4, 3}, rng);
  const auto w = random_tensor({3, 2, 3, 3}, rng);
  const auto b = random_tensor({2}, rng);
  auto f = [](const V& xx, const V& ww, const V& bb) { return energy(ag::conv_transpose2d(xx, ww, bb, 2, 1, 1)); };
  CHECK(gradient_error([&](const V& v) { return f(v, V::constant(w), V::constant(b)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return f(V::constant(x), v, V::constant(b)); }, w) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return f(V::constant(x), V::constant(w), v); }, b) < 1e-6);
}

TEST_CASE("instance norm gradients for each activation") {
  std::mt19937_64 rng(3);
  const auto x = random_tensor({2, 5, 4}, rng);
  const auto gamma = random_tensor({2}, rng, 0.5, 1.5);
  const auto beta = random_tensor({2}, rng);
  // Uneven pixel weights; a plain quadratic target is annihilated by the normalisation.
  const auto weight = random_tensor({1, 5, 4}, rng, 0.5, 1.5);
  for (Activation act : {Activation::kNone, Activation::kRelu, Activation::kLeakyRelu}) {
    auto f = [act, &weight](const V& xx, const V& gg, const V& bb) {
      return energy(ag::mask(ag::instance_norm(xx, gg, bb, act), weight));
    };
    CHECK(gradient_error([&](const V& v) { return f(v, V::constant(gamma), V::constant(beta)); }, x) < 1e-5);
    CHECK(gradient_error([&](const V& v) { return f(V::constant(x), v, V::constant(beta)); }, gamma) < 1e-5);
    CHECK(gradient_error([&](const V& v) { return f(V::constant(x), V::constant(gamma), v); }, beta) < 1e-5);
  }
}

TEST_CASE("elementwise and structural op gradients") {
  std::mt19937_64 rng(4);
  const auto x = random_tensor({3, 4, 4}, rng);
  const auto other = random_tensor({3, 4, 4}, rng);
  Tensor<double> m({1, 4, 4});
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = i % 3 == 0 ? 1.0 : 0.0;
  const auto extra = random_tensor({1, 4, 4}, rng);

  CHECK(gradient_error([](const V& v) { return energy(ag::tanh(v)); }, x) < 1e-6);
  CHECK(gradient_error([](const V& v) { return energy(ag::activation(v, Activation::kLeakyRelu)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return energy(ag::add(v, V::constant(other))); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return energy(ag::add(v, v)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return energy(ag::mask(v, m)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return energy(ag::add_constant(v, other)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return energy(ag::concat_constant(v, extra)); }, x) < 1e-6);
  CHECK(gradient_error([](const V& v) { return energy(ag::slice_channels(v, 2)); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) { return ag::weighted_l1(v, V::constant(other), m); }, x) < 1e-6);
  CHECK(gradient_error([&](const V& v) {
          const V terms[] = {energy(v), ag::l1(v, V::constant(other))};
          const double w[] = {0.7, 2.5};
          return ag::weighted_sum<double>(terms, w);
        }, x) < 1e-6);
}

TEST_CASE("detach blocks the gradient path") {
  std::mt19937_64 rng(5);
  auto p = V::parameter(random_tensor({1, 3, 3}, rng));
  ag::backward(energy(ag::detach(p)));
  CHECK_FALSE(p.has_grad());
  ag::backward(energy(ag::add(p, ag::detach(p))));
  REQUIRE(p.has_grad());
  double s = 0;
  for (double g : p.grad().values()) s += std::abs(g);
  CHECK(s > 0);
}

TEST_CASE("gradients accumulate across backward calls") {
  std::mt19937_64 rng(6);
  auto p = V::parameter(random_tensor({1, 2, 2}, rng));
  ag::backward(energy(p));
  const Tensor<double> once = p.grad();
  ag::backward(energy(p));
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(p.grad()[i] == doctest::Approx(2 * once[i]));
  p.zero_grad();
  for (double g : p.grad().values()) CHECK(g == 0.0);
}

TEST_CASE("constants record no graph") {
  auto c = V::constant(Tensor<double>({1, 2, 2}, 1.0));
  const V y = ag::tanh(c);
  CHECK_FALSE(y.requires_grad());
  CHECK(y.node()->inputs.empty());
  CHECK_THROWS(ag::backward(y));
}
