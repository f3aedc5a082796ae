#pragma once

// Serial, loop-for-loop reference versions of the kernels in kernels.hpp.
// Slow by construction; used by the tests and the kernel benchmark.

#include "g2r/kernels.hpp"

namespace g2r::reference {

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvGeometry& g);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                     const ConvGeometry& g, Tensor<T>& dx, Tensor<T>& dweight,
                     Tensor<T>& dbias);

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight,
                           const Tensor<T>& bias, int stride, int pad, int output_pad);

template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                        Activation act);

void dilate(const std::uint8_t* in, std::uint8_t* out, int height, int width, int k);

}  // namespace g2r::reference
