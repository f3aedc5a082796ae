#include "g2r/image.hpp"

#include <algorithm>
#include <numeric>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace g2r {

ShadowMask ShadowMask::from_gray(int height, int width, const std::uint8_t* gray) {
  ShadowMask m(height, width);
  for (std::size_t i = 0; i < m.bits_.size(); ++i) m.bits_[i] = gray[i] > 127 ? 1 : 0;
  return m;
}

std::size_t ShadowMask::area() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

ShadowMask ShadowMask::complement() const {
  ShadowMask out(height_, width_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
  return out;
}

ShadowMask ShadowMask::intersect(const ShadowMask& o) const {
  if (!same_size(o)) throw std::invalid_argument("ShadowMask::intersect: size mismatch");
  ShadowMask out(height_, width_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & o.bits_[i];
  return out;
}

namespace {

cv::Mat to_mat(const RgbImage& img) {
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.pixels.data()));
  return rgb;
}

RgbImage from_rgb_mat(const cv::Mat& rgb) {
  RgbImage out(rgb.rows, rgb.cols);
  cv::Mat dst(rgb.rows, rgb.cols, CV_8UC3, out.pixels.data());
  rgb.copyTo(dst);
  return out;
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw ImageIoError("cannot read image: " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return from_rgb_mat(rgb);
}

void write_rgb(const std::filesystem::path& path, const RgbImage& img) {
  cv::Mat bgr;
  cv::cvtColor(to_mat(img), bgr, cv::COLOR_RGB2BGR);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw ImageIoError("cannot write image: " + path.string());
}

ShadowMask read_mask(const std::filesystem::path& path) {
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw ImageIoError("cannot read mask: " + path.string());
  if (!gray.isContinuous()) gray = gray.clone();
  return ShadowMask::from_gray(gray.rows, gray.cols, gray.ptr<std::uint8_t>());
}

void write_mask(const std::filesystem::path& path, const ShadowMask& mask) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (std::size_t i = 0; i < mask.size(); ++i) gray.data[i] = mask[i] ? 255 : 0;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), gray)) throw ImageIoError("cannot write mask: " + path.string());
}

RgbImage resize_bilinear(const RgbImage& img, int height, int width) {
  if (img.height == height && img.width == width) return img;
  cv::Mat out;
  cv::resize(to_mat(img), out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return from_rgb_mat(out);
}

ShadowMask resize_nearest(const ShadowMask& mask, int height, int width) {
  if (mask.height() == height && mask.width() == width) return mask;
  cv::Mat src(mask.height(), mask.width(), CV_8UC1, const_cast<std::uint8_t*>(mask.data()));
  cv::Mat out;
  cv::resize(src, out, cv::Size(width, height), 0, 0, cv::INTER_NEAREST);
  ShadowMask result(height, width);
  for (std::size_t i = 0; i < result.size(); ++i) result.set(i, out.data[i] != 0);
  return result;
}

}  // namespace g2r
