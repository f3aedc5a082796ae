#pragma once

#include <array>

#include "g2r/image.hpp"
#include "g2r/tensor.hpp"

namespace g2r {

/// CIE LAB image (sRGB primaries, D65 white). Channels: L in [0,100], a, b.
class ImageLab {
 public:
  ImageLab() = default;
  ImageLab(int height, int width) : data_(Tensor<float>::image(3, height, width)) {}
  explicit ImageLab(Tensor<float> data);

  int height() const { return data_.height(); }
  int width() const { return data_.width(); }
  const Tensor<float>& tensor() const { return data_; }
  Tensor<float>& tensor() { return data_; }
  float& at(int c, int y, int x) { return data_.at(c, y, x); }
  float at(int c, int y, int x) const { return data_.at(c, y, x); }

 private:
  Tensor<float> data_;
};

/// Network working space: LAB mapped affinely to [-1,1], shape [3,H,W].
using ImageNorm = Tensor<float>;

std::array<double, 3> srgb_to_lab(double r, double g, double b);
/// Inverse of srgb_to_lab in [0,255] units; linear RGB is clipped to the gamut.
std::array<double, 3> lab_to_srgb(double l, double a, double b);

ImageLab rgb_to_lab(const RgbImage& img);
/// Rounds and clips each channel to [0,255].
RgbImage lab_to_rgb(const ImageLab& lab);

ImageNorm normalize(const ImageLab& lab);
/// Inverse of normalize; L is clamped to [0,100].
ImageLab denormalize(const ImageNorm& img);

inline constexpr double kChromaScale = 128.0;

}  // namespace g2r
