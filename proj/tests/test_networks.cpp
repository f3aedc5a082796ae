#include <doctest.h>

#include <cmath>
#include <random>

#include "g2r/networks.hpp"
#include "g2r/trainer.hpp"
#include "gradcheck.hpp"

using namespace g2r;
using V = ag::Var<double>;

namespace {

// Conv weights plus bias.
std::size_t conv(std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout; }

}  // namespace

TEST_CASE("backbone parameter count matches the ResNet-9 generator") {
  const auto g = build_backbone<float>(Role::kGenerator, 3);
  // Published count for the 9-block generator without affine norm parameters.
  const std::size_t affine = 2 * (64 + 128 + 256 + 18 * 256 + 128 + 64);
  CHECK(g->parameter_count() - affine == 11378179);
  const std::size_t expected = conv(3, 64, 7) + conv(64, 128, 3) + conv(128, 256, 3) + 18 * conv(256, 256, 3) +
                               conv(256, 128, 3) + conv(128, 64, 3) + conv(64, 3, 7) + affine;
  CHECK(g->parameter_count() == expected);

  const auto r = build_backbone<float>(Role::kRefiner, 4);
  CHECK(r->parameter_count() == expected + 64 * 49);
}

TEST_CASE("discriminator parameter count matches the 70x70 PatchGAN") {
  const auto d = build_discriminator<float>();
  const std::size_t affine = 2 * (128 + 256 + 512);
  CHECK(d->parameter_count() - affine == 2764737);
}

TEST_CASE("output shapes") {
  const auto g = build_backbone<float>(Role::kGenerator, 3);
  const auto x = ag::Var<float>::constant(Tensor<float>::image(3, 64, 48, 0.1f));
  const auto y = g->forward(x);
  CHECK(y.value().shape() == std::vector<int>{3, 64, 48});
  for (float v : y.value().values()) CHECK(std::abs(v) <= 1.0f);
  CHECK_THROWS(g->forward(ag::Var<float>::constant(Tensor<float>::image(3, 30, 32))));
  CHECK_THROWS(g->forward(ag::Var<float>::constant(Tensor<float>::image(4, 32, 32))));

  const auto d = build_discriminator<float>();
  const auto s = d->forward(ag::Var<float>::constant(Tensor<float>::image(3, 256, 256, 0.2f)));
  CHECK(s.value().shape() == std::vector<int>{1, 30, 30});
}

TEST_CASE("discriminator cells see a 70-pixel window") {
  DiscriminatorOptions opt;
  opt.base_channels = 4;
  opt.instance_norm = false;
  auto d = build_discriminator<double>(opt);
  Rng rng(3);
  init_weights(*d, 0.3, rng);
  std::mt19937_64 data(1);
  auto x = V::parameter(testing::random_tensor({3, 256, 256}, data));
  const V score = d->forward(x);
  REQUIRE(score.value().shape() == std::vector<int>{1, 30, 30});
  for (int cell : {0, 7, 29}) {
    x.zero_grad();
    Tensor<double> pick({1, 30, 30});
    pick.at(0, cell, cell) = 1.0;
    Tensor<double> target = score.value();
    for (auto& v : target.values()) v += 1.0;
    ag::backward(ag::weighted_l1(d->forward(x), V::constant(target), pick));
    int lo = 1 << 20, hi = -1;
    for (int y = 0; y < 256; ++y) {
      for (int c = 0; c < 3; ++c) {
        if (x.grad().at(c, y, 8 * cell + 10) != 0.0) {
          lo = std::min(lo, y);
          hi = std::max(hi, y);
        }
      }
    }
    CAPTURE(cell);
    CHECK(lo == std::max(0, 8 * cell - 23));
    CHECK(hi == std::min(255, 8 * cell + 46));
  }
}

TEST_CASE("backbone parameter gradients match central differences") {
  auto net = build_backbone<double>(Role::kRefiner, 4, {2, 1});
  Rng rng(5);
  init_weights(*net, 0.3, rng);
  std::mt19937_64 data(2);
  const auto x = V::constant(testing::random_tensor({4, 8, 8}, data));
  auto loss = [&]() { return ag::half_mse_to(net->forward(x), 0.2); };
  for (auto& p : net->parameters()) {
    CAPTURE(p.name);
    CHECK(testing::parameter_gradient_error(p.var, loss) < 1e-4);
  }
}

TEST_CASE("discriminator parameter gradients match central differences") {
  auto net = build_discriminator<double>({2, true});
  Rng rng(6);
  init_weights(*net, 0.3, rng);
  std::mt19937_64 data(3);
  const auto x = V::constant(testing::random_tensor({3, 32, 32}, data));
  auto loss = [&]() { return ag::half_mse_to(net->forward(x), 1.0); };
  for (auto& p : net->parameters()) {
    CAPTURE(p.name);
    CHECK(testing::parameter_gradient_error(p.var, loss) < 1e-4);
  }
}

TEST_CASE("forward helpers re-mask and transplant copies matching weights") {
  auto g = build_backbone<float>(Role::kGenerator, 3, {4, 1});
  Rng rng(1);
  init_weights(*g, 0.02, rng);
  Tensor<float> m = Tensor<float>::image(1, 16, 16);
  for (int x = 0; x < 8; ++x) m.at(0, 3, x) = 1.0f;
  const auto y = forward_generate(*g, ag::Var<float>::constant(Tensor<float>::image(3, 16, 16, 0.5f)), m);
  for (int c = 0; c < 3; ++c) {
    for (int yy = 0; yy < 16; ++yy) {
      for (int x = 0; x < 16; ++x) {
        if (m.at(0, yy, x) == 0.0f) CHECK(y.value().at(c, yy, x) == 0.0f);
      }
    }
  }
  auto r = build_backbone<float>(Role::kRefiner, 4, {4, 1});
  CHECK(transplant_weights(*g, *r) == g->parameters().size());
  const auto& gw = g->parameters()[0].var.value();
  const auto& rw = r->parameters()[0].var.value();
  CHECK(rw.dim(1) == 4);
  CHECK(rw.at(0, 0, 0) == gw.at(0, 0, 0));
}

TEST_CASE("init_weights draws from the configured distribution") {
  auto g = build_backbone<float>(Role::kGenerator, 3);
  Rng rng(7);
  init_weights(*g, 0.02, rng);
  for (const auto& p : g->parameters()) {
    const auto& v = p.var.value();
    if (p.kind == ParamKind::kConvWeight && v.size() >= 100000) {
      double m = 0, s = 0;
      for (float x : v.values()) m += x;
      m /= double(v.size());
      for (float x : v.values()) s += (x - m) * (x - m);
      const double sd = std::sqrt(s / double(v.size()));
      CHECK(sd >= 0.019);
      CHECK(sd <= 0.021);
    }
    if (p.kind == ParamKind::kBias || p.kind == ParamKind::kNormShift) {
      for (float x : v.values()) CHECK(x == 0.0f);
    }
    if (p.kind == ParamKind::kNormScale) {
      double m = 0;
      for (float x : v.values()) m += x;
      CHECK(m / double(v.size()) == doctest::Approx(1.0).epsilon(0.01));
    }
  }
  auto h = build_backbone<float>(Role::kGenerator, 3, {8, 1});
  auto h2 = build_backbone<float>(Role::kGenerator, 3, {8, 1});
  Rng a(9), b(9);
  init_weights(*h, 0.02, a);
  init_weights(*h2, 0.02, b);
  for (std::size_t i = 0; i < h->parameters().size(); ++i) {
    const auto& x = h->parameters()[i].var.value();
    const auto& y = h2->parameters()[i].var.value();
    CHECK(std::equal(x.values().begin(), x.values().end(), y.values().begin()));
  }
  CHECK_THROWS(init_weights(*h, 0.0, a));
}
