#pragma once

// Brute-force double-precision oracles. They share no code with the library:
// each is a direct transcription of the textbook definition.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace g2r::oracle {

// Row-major planes; images interleaved RGB.
using Plane = std::vector<double>;

inline double srgb_linear(double v) {
  v /= 255.0;
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
  const double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
}

/// CIE LAB of an 8-bit sRGB pixel; the reference white is sRGB (255,255,255).
inline std::array<double, 3> lab(double r8, double g8, double b8) {
  const double r = srgb_linear(r8), g = srgb_linear(g8), b = srgb_linear(b8);
  const double m[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}};
  double xyz[3], white[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = m[i][0] * r + m[i][1] * g + m[i][2] * b;
    white[i] = m[i][0] + m[i][1] + m[i][2];
  }
  const double fx = lab_f(xyz[0] / white[0]);
  const double fy = lab_f(xyz[1] / white[1]);
  const double fz = lab_f(xyz[2] / white[2]);
  return {116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

/// Mean over masked pixels of the channel-averaged |p - g|; p, g are 3
/// planes of n values each.
inline double lab_mae(const std::vector<Plane>& p, const std::vector<Plane>& g,
                      const std::vector<int>& mask) {
  double s = 0;
  int count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++count;
    double px = 0;
    for (int c = 0; c < 3; ++c) px += std::fabs(p[c][i] - g[c][i]);
    s += px / 3;
  }
  return s / count;
}

inline double true_rmse(const std::vector<Plane>& p, const std::vector<Plane>& g,
                        const std::vector<int>& mask) {
  double s = 0;
  int count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    for (int c = 0; c < 3; ++c) {
      s += (p[c][i] - g[c][i]) * (p[c][i] - g[c][i]);
      ++count;
    }
  }
  return std::sqrt(s / count);
}

inline double psnr(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  double mse = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  mse /= static_cast<double>(a.size());
  if (mse == 0) return 99.0;
  return std::min(99.0, 20 * std::log10(255.0) - 10 * std::log10(mse));
}

/// Gaussian-windowed SSIM evaluated window by window ('valid' positions),
/// averaged over positions and then over the three channels.
inline double ssim(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, int h,
                   int w) {
  const int k = 11;
  const double sigma = 1.5;
  double win[11][11], total = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      win[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2 * sigma * sigma));
      total += win[i][j];
    }
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double sum_channels = 0;
  for (int c = 0; c < 3; ++c) {
    double acc = 0;
    int windows = 0;
    for (int y0 = 0; y0 + k <= h; ++y0) {
      for (int x0 = 0; x0 + k <= w; ++x0) {
        double mx = 0, my = 0;
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) {
            const double wt = win[i][j] / total;
            mx += wt * a[((y0 + i) * w + x0 + j) * 3 + c];
            my += wt * b[((y0 + i) * w + x0 + j) * 3 + c];
          }
        }
        double vx = 0, vy = 0, cov = 0;
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) {
            const double wt = win[i][j] / total;
            const double dx = a[((y0 + i) * w + x0 + j) * 3 + c] - mx;
            const double dy = b[((y0 + i) * w + x0 + j) * 3 + c] - my;
            vx += wt * dx * dx;
            vy += wt * dy * dy;
            cov += wt * dx * dy;
          }
        }
        acc += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
    }
    sum_channels += acc / windows;
  }
  return sum_channels / 3;
}

/// Sliding-window maximum with a k x k window, anchor at k/2.
inline std::vector<int> dilate(const std::vector<int>& m, int h, int w, int k) {
  if (k <= 1) return m;
  std::vector<int> out(m.size(), 0);
  const int lo = k / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dy = -lo; dy < k - lo && !out[y * w + x]; ++dy) {
        for (int dx = -lo; dx < k - lo; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w && m[yy * w + xx]) {
            out[y * w + x] = 1;
            break;
          }
        }
      }
    }
  }
  return out;
}

/// Per-pixel, per-channel maximum over frames.
inline std::vector<std::uint8_t> vmax(const std::vector<std::vector<std::uint8_t>>& frames) {
  std::vector<std::uint8_t> out(frames[0].size(), 0);
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::max(out[i], f[i]);
  }
  return out;
}

}  // namespace g2r::oracle
