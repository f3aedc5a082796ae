#include "g2r/reference.hpp"

#include <cmath>

namespace g2r::reference {

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvGeometry& g) {
  const int cout = weight.dim(0);
  const int cin = weight.dim(1);
  const int k = weight.dim(2);
  const int ho = g.output_size(x.height());
  const int wo = g.output_size(x.width());
  Tensor<T> y = Tensor<T>::image(cout, ho, wo);
  for (int o = 0; o < cout; ++o) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
        for (int c = 0; c < cin; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int sy = kernels::source_index(oy * g.stride - g.pad + ky, x.height(), g.mode);
              const int sx = kernels::source_index(ox * g.stride - g.pad + kx, x.width(), g.mode);
              if (sy < 0 || sx < 0) continue;
              acc += static_cast<double>(weight[((static_cast<std::size_t>(o) * cin + c) * k + ky) * k + kx]) *
                     x.at(c, sy, sx);
            }
          }
        }
        y.at(o, oy, ox) = static_cast<T>(acc);
      }
    }
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                     const ConvGeometry& g, Tensor<T>& dx, Tensor<T>& dweight,
                     Tensor<T>& dbias) {
  const int cout = weight.dim(0);
  const int cin = weight.dim(1);
  const int k = weight.dim(2);
  for (int o = 0; o < cout; ++o) {
    for (int oy = 0; oy < dy.height(); ++oy) {
      for (int ox = 0; ox < dy.width(); ++ox) {
        const T gy = dy.at(o, oy, ox);
        dbias[static_cast<std::size_t>(o)] += gy;
        for (int c = 0; c < cin; ++c) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int sy = kernels::source_index(oy * g.stride - g.pad + ky, x.height(), g.mode);
              const int sx = kernels::source_index(ox * g.stride - g.pad + kx, x.width(), g.mode);
              if (sy < 0 || sx < 0) continue;
              const std::size_t wi = ((static_cast<std::size_t>(o) * cin + c) * k + ky) * k + kx;
              dweight[wi] += gy * x.at(c, sy, sx);
              dx.at(c, sy, sx) += gy * weight[wi];
            }
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight,
                           const Tensor<T>& bias, int stride, int pad, int output_pad) {
  const int cin = weight.dim(0);
  const int cout = weight.dim(1);
  const int k = weight.dim(2);
  const int ho = (x.height() - 1) * stride - 2 * pad + k + output_pad;
  const int wo = (x.width() - 1) * stride - 2 * pad + k + output_pad;
  Tensor<T> y = Tensor<T>::image(cout, ho, wo);
  for (int o = 0; o < cout; ++o) {
    for (int i = 0; i < ho * wo; ++i) {
      y[static_cast<std::size_t>(o) * ho * wo + i] = bias.empty() ? T(0) : bias[static_cast<std::size_t>(o)];
    }
  }
  // Each input pixel scatters a weighted kernel footprint into the output.
  for (int c = 0; c < cin; ++c) {
    for (int iy = 0; iy < x.height(); ++iy) {
      for (int ix = 0; ix < x.width(); ++ix) {
        for (int o = 0; o < cout; ++o) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int oy = iy * stride - pad + ky;
              const int ox = ix * stride - pad + kx;
              if (oy < 0 || ox < 0 || oy >= ho || ox >= wo) continue;
              y.at(o, oy, ox) += x.at(c, iy, ix) *
                                 weight[((static_cast<std::size_t>(c) * cout + o) * k + ky) * k + kx];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                        Activation act) {
  Tensor<T> y(x.shape());
  const std::size_t n = x.plane_size();
  for (int c = 0; c < x.channels(); ++c) {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += x.plane(c)[i];
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (x.plane(c)[i] - mean) * (x.plane(c)[i] - mean);
    var /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = gamma[static_cast<std::size_t>(c)] * (x.plane(c)[i] - mean) / std::sqrt(var + kInstanceNormEps) +
                 beta[static_cast<std::size_t>(c)];
      if (act == Activation::kRelu && v < 0) v = 0;
      if (act == Activation::kLeakyRelu && v < 0) v *= kLeakySlope;
      y.plane(c)[i] = static_cast<T>(v);
    }
  }
  return y;
}

void dilate(const std::uint8_t* in, std::uint8_t* out, int height, int width, int k) {
  if (k <= 1) {
    std::copy(in, in + static_cast<std::size_t>(height) * width, out);
    return;
  }
  const int before = k / 2;
  const int after = k - 1 - before;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::uint8_t v = 0;
      for (int dy = -before; dy <= after && !v; ++dy) {
        for (int dx = -before; dx <= after && !v; ++dx) {
          const int sy = y + dy;
          const int sx = x + dx;
          if (sy >= 0 && sx >= 0 && sy < height && sx < width &&
              in[static_cast<std::size_t>(sy) * width + sx]) {
            v = 1;
          }
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
}

template Tensor<float> conv2d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const ConvGeometry&);
template Tensor<double> conv2d(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, const ConvGeometry&);
template void conv2d_backward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const ConvGeometry&,
                              Tensor<float>&, Tensor<float>&, Tensor<float>&);
template void conv2d_backward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, const ConvGeometry&,
                              Tensor<double>&, Tensor<double>&, Tensor<double>&);
template Tensor<float> conv_transpose2d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, int, int, int);
template Tensor<double> conv_transpose2d(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, int, int, int);
template Tensor<float> instance_norm(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, Activation);
template Tensor<double> instance_norm(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, Activation);

}  // namespace g2r::reference
