#include "g2r/color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace g2r {
namespace {

// sRGB (D65) <-> XYZ, IEC 61966-2-1.
constexpr double kRgbToXyz[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                    {0.2126729, 0.7151522, 0.0721750},
                                    {0.0193339, 0.1191920, 0.9503041}};
constexpr double kXyzToRgb[3][3] = {{3.2404542, -1.5371385, -0.4985314},
                                    {-0.9692660, 1.8760108, 0.0415560},
                                    {0.0556434, -0.2040259, 1.0572252}};
// White point: the Y=1 image of RGB (1,1,1) through the matrix above, so
// that white maps to a = b = 0 exactly.
constexpr double kWhiteX = 0.4124564 + 0.3575761 + 0.1804375;
constexpr double kWhiteY = 0.2126729 + 0.7151522 + 0.0721750;
constexpr double kWhiteZ = 0.0193339 + 0.1191920 + 0.9503041;
constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double to_gamma(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }

double lab_f_inv(double f) {
  const double t = f * f * f;
  return t > kEpsilon ? t : (116.0 * f - 16.0) / kKappa;
}

}  // namespace

ImageLab::ImageLab(Tensor<float> data) : data_(std::move(data)) {
  if (data_.rank() != 3 || data_.channels() != 3) {
    throw std::invalid_argument("ImageLab: expected a [3,H,W] tensor, got " +
                                shape_string(data_.shape()));
  }
}

std::array<double, 3> srgb_to_lab(double r, double g, double b) {
  const double lin[3] = {to_linear(r / 255.0), to_linear(g / 255.0), to_linear(b / 255.0)};
  double xyz[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
  }
  const double fx = lab_f(xyz[0] / kWhiteX);
  const double fy = lab_f(xyz[1] / kWhiteY);
  const double fz = lab_f(xyz[2] / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<double, 3> lab_to_srgb(double l, double a, double b) {
  const double fy = (l + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const double xyz[3] = {lab_f_inv(fx) * kWhiteX, lab_f_inv(fy) * kWhiteY,
                         lab_f_inv(fz) * kWhiteZ};
  std::array<double, 3> rgb{};
  for (int i = 0; i < 3; ++i) {
    const double lin = kXyzToRgb[i][0] * xyz[0] + kXyzToRgb[i][1] * xyz[1] + kXyzToRgb[i][2] * xyz[2];
    rgb[static_cast<std::size_t>(i)] = 255.0 * to_gamma(std::clamp(lin, 0.0, 1.0));
  }
  return rgb;
}

ImageLab rgb_to_lab(const RgbImage& img) {
  if (img.pixels.size() != img.pixel_count() * 3) {
    throw std::invalid_argument("rgb_to_lab: expected 3 interleaved channels, buffer holds " +
                                std::to_string(img.pixels.size()) + " bytes for " +
                                std::to_string(img.pixel_count()) + " pixels");
  }
  ImageLab out(img.height, img.width);
  // 8-bit inputs take only 256 distinct values per channel.
  static const auto linear_table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = to_linear(i / 255.0);
    return t;
  }();
  const std::size_t n = img.pixel_count();
  float* L = out.tensor().plane(0);
  float* A = out.tensor().plane(1);
  float* B = out.tensor().plane(2);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double lin[3] = {linear_table[img.pixels[3 * i]], linear_table[img.pixels[3 * i + 1]],
                           linear_table[img.pixels[3 * i + 2]]};
    double xyz[3];
    for (int k = 0; k < 3; ++k) {
      xyz[k] = kRgbToXyz[k][0] * lin[0] + kRgbToXyz[k][1] * lin[1] + kRgbToXyz[k][2] * lin[2];
    }
    const double fx = lab_f(xyz[0] / kWhiteX);
    const double fy = lab_f(xyz[1] / kWhiteY);
    const double fz = lab_f(xyz[2] / kWhiteZ);
    L[i] = static_cast<float>(std::clamp(116.0 * fy - 16.0, 0.0, 100.0));
    A[i] = static_cast<float>(500.0 * (fx - fy));
    B[i] = static_cast<float>(200.0 * (fy - fz));
  }
  return out;
}

RgbImage lab_to_rgb(const ImageLab& lab) {
  RgbImage out(lab.height(), lab.width());
  const std::size_t n = out.pixel_count();
  const float* L = lab.tensor().plane(0);
  const float* A = lab.tensor().plane(1);
  const float* B = lab.tensor().plane(2);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto rgb = lab_to_srgb(L[i], A[i], B[i]);
    for (int c = 0; c < 3; ++c) {
      out.pixels[3 * i + static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(std::lround(std::clamp(rgb[static_cast<std::size_t>(c)], 0.0, 255.0)));
    }
  }
  return out;
}

ImageNorm normalize(const ImageLab& lab) {
  ImageNorm out = lab.tensor();
  const std::size_t n = out.plane_size();
  float* L = out.plane(0);
  float* A = out.plane(1);
  float* B = out.plane(2);
  for (std::size_t i = 0; i < n; ++i) {
    L[i] = std::clamp(static_cast<float>(L[i] / 50.0 - 1.0), -1.0f, 1.0f);
    A[i] = std::clamp(static_cast<float>(A[i] / kChromaScale), -1.0f, 1.0f);
    B[i] = std::clamp(static_cast<float>(B[i] / kChromaScale), -1.0f, 1.0f);
  }
  return out;
}

ImageLab denormalize(const ImageNorm& img) {
  if (img.rank() != 3 || img.channels() != 3) {
    throw std::invalid_argument("denormalize: expected [3,H,W], got " + shape_string(img.shape()));
  }
  ImageLab out(img);
  const std::size_t n = img.plane_size();
  float* L = out.tensor().plane(0);
  float* A = out.tensor().plane(1);
  float* B = out.tensor().plane(2);
  for (std::size_t i = 0; i < n; ++i) {
    L[i] = std::clamp(static_cast<float>((L[i] + 1.0) * 50.0), 0.0f, 100.0f);
    A[i] = static_cast<float>(A[i] * kChromaScale);
    B[i] = static_cast<float>(B[i] * kChromaScale);
  }
  return out;
}

}  // namespace g2r
