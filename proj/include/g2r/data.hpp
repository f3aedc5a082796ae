#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "g2r/color.hpp"
#include "g2r/image.hpp"

namespace g2r {

using Rng = std::mt19937_64;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an image has no non-shadow pixels to sample from.
class SampleImpossibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split { kTrain, kTest };

struct DatasetRecord {
  std::string stem;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::optional<std::filesystem::path> shadow_free;
};

struct DatasetIndex {
  std::filesystem::path root;
  Split split = Split::kTrain;
  std::vector<DatasetRecord> records;
  std::vector<std::filesystem::path> mask_pool;
};

/// Reads an ISTD-style tree: <root>/<split>_A (shadow images), <split>_B
/// (masks), optional <split>_C (shadow-free). Files pair up by stem.
DatasetIndex load_dataset(const std::filesystem::path& root, Split split,
                          bool validate_sizes = true);

std::string split_name(Split split);

/// Reads an 8-bit image and maps it to network space.
ImageNorm load_image_norm(const std::filesystem::path& path);
ImageNorm rgb_to_norm(const RgbImage& img);
RgbImage norm_to_rgb(const ImageNorm& img);

/// img where mask = 1, exactly 0 elsewhere.
ImageNorm mask_region(const ImageNorm& img, const ShadowMask& mask);

/// Binary dilation by a tau x tau square; tau in {0,1} is the identity.
ShadowMask dilate_mask(const ShadowMask& mask, int tau);

enum class FallbackReason { kNone, kLargeShadow, kRetriesExhausted, kNoShadow };

struct RegionPair {
  ImageNorm shadow_region;     // S masked by its own shadow mask
  ImageNorm nonshadow_region;  // S masked by sample_mask
  ShadowMask sample_mask;      // sampled pool mask intersected with the lit area
  ImageNorm source_image;
  ShadowMask source_mask;
  bool fallback_used = false;
  FallbackReason fallback_reason = FallbackReason::kNone;
  std::size_t pool_index = 0;
};

struct SamplingOptions {
  double alpha = 0.2;
  int max_retries = 50;
};

/// Draws a non-shadow training region whose area matches the shadow area
/// within (1 - alpha, 1 + alpha). Shadows covering more than half the frame
/// skip the area test. When max_retries random draws miss, the rest of the
/// pool is swept in random order; only if no mask qualifies is the candidate
/// closest to the interval used and the pair flagged as a fallback.
RegionPair sample_region_pair(const ImageNorm& image, const ShadowMask& shadow_mask,
                              std::span<const ShadowMask> pool, const SamplingOptions& options,
                              Rng& rng);

struct AugmentOptions {
  int load_size = 448;
  int crop_size = 400;
  bool flip = true;
};

struct AugmentParams {
  int crop_y = 0;
  int crop_x = 0;
  bool flip = false;
};

AugmentParams draw_augment(const AugmentOptions& options, Rng& rng);

/// Scales image (bilinear) and mask (nearest) to load_size, crops the same
/// crop_size window from both and mirrors both when params.flip is set.
std::pair<ImageNorm, ShadowMask> apply_augment(const ImageNorm& image, const ShadowMask& mask,
                                               const AugmentOptions& options,
                                               const AugmentParams& params);

std::pair<ImageNorm, ShadowMask> augment(const ImageNorm& image, const ShadowMask& mask,
                                         const AugmentOptions& options, Rng& rng);

/// Bilinear resize of every channel.
ImageNorm resize_norm(const ImageNorm& image, int height, int width);

/// S * (1 - M): the part of the frame a spliced region does not replace.
ImageNorm outside_region(const ImageNorm& image, const ShadowMask& mask);

/// 4-channel field: channels 0..2 take refined where mask = 1 and image
/// elsewhere, channel 3 is the mask. `refined` must vanish outside the mask.
Tensor<float> compose_embed(const ImageNorm& refined, const ImageNorm& image,
                            const ShadowMask& mask);

}  // namespace g2r
