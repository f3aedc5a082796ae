#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2r/color.hpp"
#include "g2r/image.hpp"

namespace g2r {

/// Thrown when a region metric is asked for over an empty mask.
class RegionUndefinedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// PSNR is clipped to this value; identical images report exactly this.
inline constexpr double kPsnrCapDb = 99.0;

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

// The shadow-removal literature's "RMSE": mean absolute LAB difference over
// the masked pixels, averaged over the three channels.
double lab_mae_region(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask);

/// Actual root-mean-square LAB difference over the masked pixels (all
/// channels pooled). Not the number the literature reports as "RMSE".
double true_rmse_region(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask);

double psnr(const RgbImage& pred, const RgbImage& gt);
double ssim(const RgbImage& pred, const RgbImage& gt, const SsimParams& params = {});

/// Region variants: both images are zeroed outside the mask, then scored
/// over the full frame.
RgbImage mask_rgb(const RgbImage& img, const ShadowMask& mask);
double psnr_region(const RgbImage& pred, const RgbImage& gt, const ShadowMask& mask);
double ssim_region(const RgbImage& pred, const RgbImage& gt, const ShadowMask& mask);

/// Per-pixel, per-channel maximum over the frames.
RgbImage vmax(std::span<const RgbImage> frames);

/// ITU-R BT.601 luma.
std::vector<double> luma(const RgbImage& img);

struct MovingShadow {
  std::vector<ShadowMask> per_frame;  // luma(vmax) - luma(frame) > threshold
  ShadowMask moving;                  // shadow in some frame and lit in another
};

MovingShadow moving_shadow_mask(std::span<const RgbImage> frames, const RgbImage& vmax_img,
                                double threshold);

struct ImageMetrics {
  std::string name;
  std::optional<double> rmse_shadow, rmse_nonshadow, rmse_all;
  std::optional<double> psnr_shadow, psnr_nonshadow, psnr_all;
  std::optional<double> ssim_shadow, ssim_nonshadow, ssim_all;
  std::optional<double> rmse_dagger;
  // Inputs to the pixel-averaged variant.
  double shadow_abs_sum = 0.0;
  std::size_t shadow_pixels = 0;
};

struct MetricsReport {
  std::vector<ImageMetrics> per_image;
  ImageMetrics mean;  // per-image metrics averaged over images where defined
  std::optional<double> pixel_averaged_rmse;
  std::vector<std::string> warnings;

  /// Recomputes `mean` and `pixel_averaged_rmse` from `per_image`.
  void finalize();
  void write_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;
  std::string to_json_string() const;
};

/// Scores one prediction against ground truth; regions come from the shadow
/// mask (shadow), its complement (non-shadow), and the whole frame.
ImageMetrics score_image(const std::string& name, const RgbImage& pred, const RgbImage& gt,
                         const ShadowMask& shadow);

}  // namespace g2r
