// Parallel kernels against the serial reference versions.

#include <benchmark/benchmark.h>

#include <random>

#include "g2r/kernels.hpp"
#include "g2r/reference.hpp"

using namespace g2r;

namespace {

Tensor<float> random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor<float> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1, 1);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Residual-block convolution at the generator bottleneck: C channels, side S.
void BM_Conv(benchmark::State& state, bool parallel) {
  const int c = static_cast<int>(state.range(0)), s = static_cast<int>(state.range(1));
  const auto x = random_tensor({c, s, s}, 1);
  const auto w = random_tensor({c, c, 3, 3}, 2);
  const auto b = random_tensor({c}, 3);
  const ConvGeometry g{3, 1, 1, PadMode::kReflect};
  for (auto _ : state) {
    auto y = parallel ? kernels::conv2d(x, w, b, g) : reference::conv2d(x, w, b, g);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * c * c * 9 * s * s);
}

void BM_ConvBackward(benchmark::State& state, bool parallel) {
  const int c = static_cast<int>(state.range(0)), s = static_cast<int>(state.range(1));
  const auto x = random_tensor({c, s, s}, 1);
  const auto w = random_tensor({c, c, 3, 3}, 2);
  const auto dy = random_tensor({c, s, s}, 4);
  const ConvGeometry g{3, 1, 1, PadMode::kReflect};
  for (auto _ : state) {
    Tensor<float> dx(x.shape()), dw(w.shape()), db({c});
    if (parallel) {
      kernels::conv2d_backward(x, w, dy, g, &dx, &dw, &db);
    } else {
      reference::conv2d_backward(x, w, dy, g, dx, dw, db);
    }
    benchmark::DoNotOptimize(dw.data());
  }
}

void BM_InstanceNorm(benchmark::State& state, bool parallel) {
  const int c = static_cast<int>(state.range(0)), s = static_cast<int>(state.range(1));
  const auto x = random_tensor({c, s, s}, 1);
  const Tensor<float> gamma({c}, 1.0f), beta({c});
  for (auto _ : state) {
    auto y = parallel ? kernels::instance_norm(x, gamma, beta, Activation::kRelu, nullptr)
                      : reference::instance_norm(x, gamma, beta, Activation::kRelu);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_Dilate(benchmark::State& state, bool parallel) {
  const int side = static_cast<int>(state.range(0)), k = static_cast<int>(state.range(1));
  std::vector<std::uint8_t> in(static_cast<std::size_t>(side) * side), out(in.size());
  std::mt19937_64 rng(5);
  for (auto& v : in) v = rng() % 50 == 0;
  for (auto _ : state) {
    if (parallel) {
      kernels::dilate(in.data(), out.data(), side, side, k);
    } else {
      reference::dilate(in.data(), out.data(), side, side, k);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Conv, parallel, true)->Args({64, 64})->Args({256, 32})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Conv, reference, false)->Args({64, 64})->Args({256, 32})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ConvBackward, parallel, true)->Args({64, 64})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ConvBackward, reference, false)->Args({64, 64})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InstanceNorm, parallel, true)->Args({64, 128})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_InstanceNorm, reference, false)->Args({64, 128})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Dilate, parallel, true)->Args({400, 50})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Dilate, reference, false)->Args({400, 50})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
