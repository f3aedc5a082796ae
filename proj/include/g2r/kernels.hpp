#pragma once

// OpenMP-parallel compute kernels behind the autodiff ops. Every kernel here
// has a serial twin in reference.hpp that the tests compare against.

#include <vector>

#include "g2r/tensor.hpp"

namespace g2r {

enum class PadMode { kZero, kReflect };

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 0;
  PadMode mode = PadMode::kZero;

  int output_size(int input) const { return (input + 2 * pad - kernel) / stride + 1; }
};

enum class Activation { kNone, kRelu, kLeakyRelu };

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kInstanceNormEps = 1e-5;

namespace kernels {

/// Maps a padded coordinate back into [0, n). Returns -1 for zero padding.
int source_index(int i, int n, PadMode mode);

// x: [Cin,H,W], weight: [Cout,Cin,K,K], bias: [Cout] (may be empty).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvGeometry& g);

/// Accumulates into dx / dweight / dbias. Pass nullptr to skip a gradient.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                     const ConvGeometry& g, Tensor<T>* dx, Tensor<T>* dweight,
                     Tensor<T>* dbias);

// Transposed convolution (zero padding). x: [Cin,H,W], weight: [Cin,Cout,K,K].
// Output side = (in - 1) * stride - 2 * pad + kernel + output_pad.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight,
                           const Tensor<T>& bias, int kernel, int stride, int pad,
                           int output_pad);

template <typename T>
void conv_transpose2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                               const Tensor<T>& dy, int stride, int pad, Tensor<T>* dx,
                               Tensor<T>* dweight, Tensor<T>* dbias);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

/// Per-channel instance normalization with affine scale/shift followed by
/// an optional activation. gamma/beta: [C].
template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                        Activation act, NormStats* stats);

/// y is the forward output (post-activation); it carries the activation mask.
template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& y,
                            const Tensor<T>& dy, Activation act, const NormStats& stats,
                            Tensor<T>* dx, Tensor<T>* dgamma, Tensor<T>* dbeta);

/// Square max filter of side k over a single-channel binary plane.
/// Offsets span [-k/2, k-1-k/2]; k <= 1 copies the input.
void dilate(const std::uint8_t* in, std::uint8_t* out, int height, int width, int k);

}  // namespace kernels
}  // namespace g2r
