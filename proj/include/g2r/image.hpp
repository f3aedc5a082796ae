#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "g2r/tensor.hpp"

namespace g2r {

/// 8-bit sRGB image, interleaved RGB rows.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
  std::uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool same_size(const RgbImage& o) const { return height == o.height && width == o.width; }
  bool operator==(const RgbImage&) const = default;
};

/// Binary per-pixel mask; every stored value is 0 or 1.
class ShadowMask {
 public:
  ShadowMask() = default;
  ShadowMask(int height, int width, bool fill = false)
      : height_(height), width_(width),
        bits_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {}

  /// Binarizes an 8-bit plane at > 127.
  static ShadowMask from_gray(int height, int width, const std::uint8_t* gray);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }
  std::size_t area() const;
  bool empty_region() const { return area() == 0; }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool on) { bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  const std::uint8_t* data() const { return bits_.data(); }
  std::uint8_t* data() { return bits_.data(); }

  ShadowMask complement() const;
  ShadowMask intersect(const ShadowMask& o) const;
  bool same_size(const ShadowMask& o) const { return height_ == o.height_ && width_ == o.width_; }
  bool operator==(const ShadowMask&) const = default;

  /// [1,H,W] tensor of 0/1 values.
  template <typename T>
  Tensor<T> to_tensor() const {
    Tensor<T> t = Tensor<T>::image(1, height_, width_);
    for (std::size_t i = 0; i < bits_.size(); ++i) t[i] = bits_[i] ? T(1) : T(0);
    return t;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RgbImage read_rgb(const std::filesystem::path& path);
void write_rgb(const std::filesystem::path& path, const RgbImage& img);
ShadowMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const ShadowMask& mask);

RgbImage resize_bilinear(const RgbImage& img, int height, int width);
ShadowMask resize_nearest(const ShadowMask& mask, int height, int width);

}  // namespace g2r
