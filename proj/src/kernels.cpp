#include "g2r/kernels.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <sstream>

namespace g2r {

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Upper bound on im2col scratch, in elements.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

int rows_per_chunk(int col_rows, int out_width, int out_height) {
  const std::size_t per_row = static_cast<std::size_t>(col_rows) * out_width;
  const std::size_t rows = std::max<std::size_t>(1, kColumnBudget / std::max<std::size_t>(1, per_row));
  return static_cast<int>(std::min<std::size_t>(rows, static_cast<std::size_t>(out_height)));
}

// Unfolds output rows [r0, r1) of a convolution over src [C,H,W] into
// col [C*K*K, (r1-r0)*Wo].
template <typename T>
void im2col(const T* src, int channels, int height, int width, const ConvGeometry& g,
            int out_width, int r0, int r1, T* col) {
  const int k = g.kernel;
  const std::size_t ncols = static_cast<std::size_t>(r1 - r0) * out_width;
  const int col_rows = channels * k * k;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < col_rows; ++row) {
    const int c = row / (k * k);
    const int ky = (row / k) % k;
    const int kx = row % k;
    const T* plane = src + static_cast<std::size_t>(c) * height * width;
    T* dst = col + static_cast<std::size_t>(row) * ncols;
    for (int oy = r0; oy < r1; ++oy) {
      const int sy = source_index(oy * g.stride - g.pad + ky, height, g.mode);
      T* drow = dst + static_cast<std::size_t>(oy - r0) * out_width;
      if (sy < 0) {
        std::fill(drow, drow + out_width, T(0));
        continue;
      }
      const T* srow = plane + static_cast<std::size_t>(sy) * width;
      for (int ox = 0; ox < out_width; ++ox) {
        const int sx = source_index(ox * g.stride - g.pad + kx, width, g.mode);
        drow[ox] = sx < 0 ? T(0) : srow[sx];
      }
    }
  }
}

// Adjoint of im2col: scatters col back into dst, accumulating.
template <typename T>
void col2im(const T* col, int channels, int height, int width, const ConvGeometry& g,
            int out_width, int r0, int r1, T* dst) {
  const int k = g.kernel;
  const std::size_t ncols = static_cast<std::size_t>(r1 - r0) * out_width;
  // Parallel over channels: each channel plane is written by one thread.
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    T* plane = dst + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        const T* srcrow = col + static_cast<std::size_t>(row) * ncols;
        for (int oy = r0; oy < r1; ++oy) {
          const int sy = source_index(oy * g.stride - g.pad + ky, height, g.mode);
          if (sy < 0) continue;
          T* prow = plane + static_cast<std::size_t>(sy) * width;
          const T* crow = srcrow + static_cast<std::size_t>(oy - r0) * out_width;
          for (int ox = 0; ox < out_width; ++ox) {
            const int sx = source_index(ox * g.stride - g.pad + kx, width, g.mode);
            if (sx >= 0) prow[sx] += crow[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void add_bias(Tensor<T>& y, const Tensor<T>& bias) {
  if (bias.empty()) return;
  const std::size_t n = y.plane_size();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < y.channels(); ++c) {
    T* p = y.plane(c);
    const T b = bias[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n; ++i) p[i] += b;
  }
}

template <typename T>
void accumulate_bias_grad(const Tensor<T>& dy, Tensor<T>& dbias) {
  const std::size_t n = dy.plane_size();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < dy.channels(); ++c) {
    const T* p = dy.plane(c);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    dbias[static_cast<std::size_t>(c)] += static_cast<T>(s);
  }
}

void check_conv_inputs(const std::vector<int>& xs, const std::vector<int>& ws, int cin_dim) {
  if (xs.size() != 3 || ws.size() != 4 || ws[2] != ws[3]) {
    throw std::invalid_argument("conv: expected [C,H,W] input and square [*,*,K,K] weight");
  }
  if (xs[0] != ws[static_cast<std::size_t>(cin_dim)]) {
    throw std::invalid_argument("conv: input has " + std::to_string(xs[0]) +
                                " channels, weight expects " +
                                std::to_string(ws[static_cast<std::size_t>(cin_dim)]));
  }
}

}  // namespace

int source_index(int i, int n, PadMode mode) {
  if (i >= 0 && i < n) return i;
  if (mode == PadMode::kZero) return -1;
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 const ConvGeometry& g) {
  check_conv_inputs(x.shape(), weight.shape(), 1);
  if (g.kernel != weight.dim(2)) throw std::invalid_argument("conv2d: kernel size mismatch");
  if (g.mode == PadMode::kReflect && (g.pad >= x.height() || g.pad >= x.width())) {
    throw std::invalid_argument("conv2d: reflection padding must be smaller than the input");
  }
  const int cout = weight.dim(0);
  const int ho = g.output_size(x.height());
  const int wo = g.output_size(x.width());
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv2d: input smaller than kernel");
  Tensor<T> y = Tensor<T>::image(cout, ho, wo);
  const int col_rows = x.channels() * g.kernel * g.kernel;
  const int chunk = rows_per_chunk(col_rows, wo, ho);
  std::vector<T> col(static_cast<std::size_t>(col_rows) * chunk * wo);
  ConstMatMap<T> w(weight.data(), cout, col_rows, Eigen::OuterStride<>(col_rows));
  const std::size_t ystride = static_cast<std::size_t>(ho) * wo;
  for (int r0 = 0; r0 < ho; r0 += chunk) {
    const int r1 = std::min(ho, r0 + chunk);
    const int n = (r1 - r0) * wo;
    im2col(x.data(), x.channels(), x.height(), x.width(), g, wo, r0, r1, col.data());
    ConstMatMap<T> cm(col.data(), col_rows, n, Eigen::OuterStride<>(n));
    MatMap<T> ym(y.data() + static_cast<std::size_t>(r0) * wo, cout, n,
                 Eigen::OuterStride<>(static_cast<Eigen::Index>(ystride)));
    ym.noalias() = w * cm;
  }
  add_bias(y, bias);
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                     const ConvGeometry& g, Tensor<T>* dx, Tensor<T>* dweight,
                     Tensor<T>* dbias) {
  const int cout = weight.dim(0);
  const int ho = dy.height();
  const int wo = dy.width();
  const int col_rows = x.channels() * g.kernel * g.kernel;
  const int chunk = rows_per_chunk(col_rows, wo, ho);
  std::vector<T> col(static_cast<std::size_t>(col_rows) * chunk * wo);
  ConstMatMap<T> w(weight.data(), cout, col_rows, Eigen::OuterStride<>(col_rows));
  const std::size_t ystride = static_cast<std::size_t>(ho) * wo;
  for (int r0 = 0; r0 < ho && (dx || dweight); r0 += chunk) {
    const int r1 = std::min(ho, r0 + chunk);
    const int n = (r1 - r0) * wo;
    ConstMatMap<T> dym(dy.data() + static_cast<std::size_t>(r0) * wo, cout, n,
                       Eigen::OuterStride<>(static_cast<Eigen::Index>(ystride)));
    if (dweight) {
      im2col(x.data(), x.channels(), x.height(), x.width(), g, wo, r0, r1, col.data());
      ConstMatMap<T> cm(col.data(), col_rows, n, Eigen::OuterStride<>(n));
      MatMap<T> dw(dweight->data(), cout, col_rows, Eigen::OuterStride<>(col_rows));
      dw.noalias() += dym * cm.transpose();
    }
    if (dx) {
      MatMap<T> cm(col.data(), col_rows, n, Eigen::OuterStride<>(n));
      cm.noalias() = w.transpose() * dym;
      col2im(col.data(), x.channels(), x.height(), x.width(), g, wo, r0, r1, dx->data());
    }
  }
  if (dbias) accumulate_bias_grad(dy, *dbias);
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight,
                           const Tensor<T>& bias, int kernel, int stride, int pad,
                           int output_pad) {
  check_conv_inputs(x.shape(), weight.shape(), 0);
  if (kernel != weight.dim(2)) throw std::invalid_argument("conv_transpose2d: kernel mismatch");
  if (output_pad >= stride && output_pad > 0) {
    throw std::invalid_argument("conv_transpose2d: output padding must be < stride");
  }
  const int cin = x.channels();
  const int cout = weight.dim(1);
  const int ho = (x.height() - 1) * stride - 2 * pad + kernel + output_pad;
  const int wo = (x.width() - 1) * stride - 2 * pad + kernel + output_pad;
  const ConvGeometry g{kernel, stride, pad, PadMode::kZero};
  Tensor<T> y = Tensor<T>::image(cout, ho, wo);
  const int col_rows = cout * kernel * kernel;
  const int hin = x.height();
  const int win = x.width();
  const int chunk = rows_per_chunk(col_rows, win, hin);
  std::vector<T> col(static_cast<std::size_t>(col_rows) * chunk * win);
  ConstMatMap<T> w(weight.data(), cin, col_rows, Eigen::OuterStride<>(col_rows));
  const std::size_t xstride = static_cast<std::size_t>(hin) * win;
  for (int r0 = 0; r0 < hin; r0 += chunk) {
    const int r1 = std::min(hin, r0 + chunk);
    const int n = (r1 - r0) * win;
    ConstMatMap<T> xm(x.data() + static_cast<std::size_t>(r0) * win, cin, n,
                      Eigen::OuterStride<>(static_cast<Eigen::Index>(xstride)));
    MatMap<T> cm(col.data(), col_rows, n, Eigen::OuterStride<>(n));
    cm.noalias() = w.transpose() * xm;
    col2im(col.data(), cout, ho, wo, g, win, r0, r1, y.data());
  }
  add_bias(y, bias);
  return y;
}

template <typename T>
void conv_transpose2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                               const Tensor<T>& dy, int stride, int pad, Tensor<T>* dx,
                               Tensor<T>* dweight, Tensor<T>* dbias) {
  const int kernel = weight.dim(2);
  const int cin = x.channels();
  const int cout = weight.dim(1);
  const int hin = x.height();
  const int win = x.width();
  const ConvGeometry g{kernel, stride, pad, PadMode::kZero};
  const int col_rows = cout * kernel * kernel;
  const int chunk = rows_per_chunk(col_rows, win, hin);
  std::vector<T> col(static_cast<std::size_t>(col_rows) * chunk * win);
  ConstMatMap<T> w(weight.data(), cin, col_rows, Eigen::OuterStride<>(col_rows));
  const std::size_t xstride = static_cast<std::size_t>(hin) * win;
  for (int r0 = 0; r0 < hin && (dx || dweight); r0 += chunk) {
    const int r1 = std::min(hin, r0 + chunk);
    const int n = (r1 - r0) * win;
    im2col(dy.data(), cout, dy.height(), dy.width(), g, win, r0, r1, col.data());
    ConstMatMap<T> cm(col.data(), col_rows, n, Eigen::OuterStride<>(n));
    if (dx) {
      MatMap<T> dxm(dx->data() + static_cast<std::size_t>(r0) * win, cin, n,
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(xstride)));
      dxm.noalias() += w * cm;
    }
    if (dweight) {
      ConstMatMap<T> xm(x.data() + static_cast<std::size_t>(r0) * win, cin, n,
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(xstride)));
      MatMap<T> dw(dweight->data(), cin, col_rows, Eigen::OuterStride<>(col_rows));
      dw.noalias() += xm * cm.transpose();
    }
  }
  if (dbias) accumulate_bias_grad(dy, *dbias);
}

template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                        Activation act, NormStats* stats) {
  const int channels = x.channels();
  if (gamma.size() != static_cast<std::size_t>(channels) || beta.size() != gamma.size()) {
    throw std::invalid_argument("instance_norm: affine parameters do not match channels");
  }
  const std::size_t n = x.plane_size();
  Tensor<T> y(x.shape());
  NormStats local;
  NormStats& s = stats ? *stats : local;
  s.mean.assign(static_cast<std::size_t>(channels), 0.0);
  s.inv_std.assign(static_cast<std::size_t>(channels), 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    const T* in = x.plane(c);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += in[i];
    const double mean = sum / static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = in[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double istd = 1.0 / std::sqrt(var + kInstanceNormEps);
    s.mean[static_cast<std::size_t>(c)] = mean;
    s.inv_std[static_cast<std::size_t>(c)] = istd;
    const double scale = gamma[static_cast<std::size_t>(c)] * istd;
    const double shift = beta[static_cast<std::size_t>(c)] - mean * scale;
    T* out = y.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      T v = static_cast<T>(in[i] * scale + shift);
      if (act == Activation::kRelu) {
        v = v > T(0) ? v : T(0);
      } else if (act == Activation::kLeakyRelu) {
        v = v > T(0) ? v : static_cast<T>(kLeakySlope) * v;
      }
      out[i] = v;
    }
  }
  return y;
}

template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& y,
                            const Tensor<T>& dy, Activation act, const NormStats& stats,
                            Tensor<T>* dx, Tensor<T>* dgamma, Tensor<T>* dbeta) {
  const int channels = x.channels();
  const std::size_t n = x.plane_size();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const T* in = x.plane(c);
    const T* out = y.plane(c);
    const T* g = dy.plane(c);
    const double mean = stats.mean[cc];
    const double istd = stats.inv_std[cc];
    double sum_g = 0;
    double sum_gx = 0;
    std::vector<double> gpre(n);
    for (std::size_t i = 0; i < n; ++i) {
      double gi = g[i];
      if (act == Activation::kRelu) {
        gi = out[i] > T(0) ? gi : 0.0;
      } else if (act == Activation::kLeakyRelu) {
        gi = out[i] > T(0) ? gi : kLeakySlope * gi;
      }
      gpre[i] = gi;
      const double xhat = (in[i] - mean) * istd;
      sum_g += gi;
      sum_gx += gi * xhat;
    }
    if (dgamma) (*dgamma)[cc] += static_cast<T>(sum_gx);
    if (dbeta) (*dbeta)[cc] += static_cast<T>(sum_g);
    if (dx) {
      const double gam = gamma[cc];
      const double mg = sum_g / static_cast<double>(n);
      const double mgx = sum_gx / static_cast<double>(n);
      T* d = dx->plane(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double xhat = (in[i] - mean) * istd;
        d[i] += static_cast<T>(gam * istd * (gpre[i] - mg - xhat * mgx));
      }
    }
  }
}

void dilate(const std::uint8_t* in, std::uint8_t* out, int height, int width, int k) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (k <= 1) {
    std::copy(in, in + n, out);
    return;
  }
  const int before = k / 2;         // reach towards lower indices in the source
  const int after = k - 1 - before;  // reach towards higher indices
  std::vector<std::uint8_t> tmp(n);
  // Horizontal pass: out(x) = any(in[x - before .. x + after]).
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = in + static_cast<std::size_t>(y) * width;
    std::vector<int> prefix(static_cast<std::size_t>(width) + 1, 0);
    for (int x = 0; x < width; ++x) prefix[x + 1] = prefix[x] + (row[x] ? 1 : 0);
    std::uint8_t* t = tmp.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      const int lo = std::max(0, x - before);
      const int hi = std::min(width - 1, x + after);
      t[x] = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
    }
  }
#pragma omp parallel for schedule(static)
  for (int x = 0; x < width; ++x) {
    std::vector<int> prefix(static_cast<std::size_t>(height) + 1, 0);
    for (int y = 0; y < height; ++y) {
      prefix[y + 1] = prefix[y] + (tmp[static_cast<std::size_t>(y) * width + x] ? 1 : 0);
    }
    for (int y = 0; y < height; ++y) {
      const int lo = std::max(0, y - before);
      const int hi = std::min(height - 1, y + after);
      out[static_cast<std::size_t>(y) * width + x] = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
    }
  }
}

#define G2R_INSTANTIATE(T)                                                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,            \
                            const ConvGeometry&);                                            \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,        \
                                const ConvGeometry&, Tensor<T>*, Tensor<T>*, Tensor<T>*);    \
  template Tensor<T> conv_transpose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                      int, int, int, int);                                   \
  template void conv_transpose2d_backward(const Tensor<T>&, const Tensor<T>&,                \
                                          const Tensor<T>&, int, int, Tensor<T>*,            \
                                          Tensor<T>*, Tensor<T>*);                           \
  template Tensor<T> instance_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                   Activation, NormStats*);                                  \
  template void instance_norm_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                       const Tensor<T>&, Activation, const NormStats&,       \
                                       Tensor<T>*, Tensor<T>*, Tensor<T>*);

G2R_INSTANTIATE(float)
G2R_INSTANTIATE(double)
#undef G2R_INSTANTIATE

}  // namespace kernels
}  // namespace g2r
