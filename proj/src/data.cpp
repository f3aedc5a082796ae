#include "g2r/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <opencv2/imgproc.hpp>

#include "g2r/kernels.hpp"

namespace fs = std::filesystem;

namespace g2r {
namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
         ext == ".tiff";
}

std::map<std::string, fs::path> index_by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

void check_image_mask(const ImageNorm& image, const ShadowMask& mask, const char* what) {
  if (image.rank() != 3 || image.height() != mask.height() || image.width() != mask.width()) {
    throw std::invalid_argument(std::string(what) + ": image " + shape_string(image.shape()) +
                                " does not match mask " + std::to_string(mask.height()) + "x" +
                                std::to_string(mask.width()));
  }
}

}  // namespace

std::string split_name(Split split) { return split == Split::kTrain ? "train" : "test"; }

DatasetIndex load_dataset(const fs::path& root, Split split, bool validate_sizes) {
  const std::string prefix = split_name(split);
  const fs::path image_dir = root / (prefix + "_A");
  const fs::path mask_dir = root / (prefix + "_B");
  const fs::path free_dir = root / (prefix + "_C");
  if (!fs::is_directory(image_dir)) throw DatasetError("missing image directory " + image_dir.string());
  if (!fs::is_directory(mask_dir)) throw DatasetError("missing mask directory " + mask_dir.string());
  const auto images = index_by_stem(image_dir);
  const auto masks = index_by_stem(mask_dir);
  const auto frees = index_by_stem(free_dir);

  DatasetIndex index;
  index.root = root;
  index.split = split;
  std::vector<std::string> missing;
  for (const auto& [stem, path] : images) {
    auto m = masks.find(stem);
    if (m == masks.end()) {
      missing.push_back(stem);
      continue;
    }
    DatasetRecord rec{stem, path, m->second, std::nullopt};
    if (auto f = frees.find(stem); f != frees.end()) rec.shadow_free = f->second;
    index.records.push_back(std::move(rec));
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& s : missing) names += (names.empty() ? "" : ", ") + s;
    throw DatasetError("no mask for image(s): " + names);
  }
  if (validate_sizes) {
    for (const auto& rec : index.records) {
      const RgbImage img = read_rgb(rec.image);
      const ShadowMask mask = read_mask(rec.mask);
      if (img.height != mask.height() || img.width != mask.width()) {
        throw DatasetError("image and mask sizes differ for " + rec.stem);
      }
    }
  }
  if (split == Split::kTrain) {
    for (const auto& rec : index.records) index.mask_pool.push_back(rec.mask);
    if (index.mask_pool.empty()) throw DatasetError("training split is empty: " + root.string());
  }
  return index;
}

ImageNorm rgb_to_norm(const RgbImage& img) { return normalize(rgb_to_lab(img)); }

RgbImage norm_to_rgb(const ImageNorm& img) { return lab_to_rgb(denormalize(img)); }

ImageNorm load_image_norm(const fs::path& path) { return rgb_to_norm(read_rgb(path)); }

ImageNorm mask_region(const ImageNorm& img, const ShadowMask& mask) {
  check_image_mask(img, mask, "mask_region");
  ImageNorm out(img.shape());
  const std::size_t n = img.plane_size();
  for (int c = 0; c < img.channels(); ++c) {
    const float* src = img.plane(c);
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) dst[i] = mask[i] ? src[i] : 0.0f;
  }
  return out;
}

ShadowMask dilate_mask(const ShadowMask& mask, int tau) {
  if (tau < 0) throw std::invalid_argument("dilate_mask: kernel size must be >= 0");
  ShadowMask out(mask.height(), mask.width());
  kernels::dilate(mask.data(), out.data(), mask.height(), mask.width(), tau);
  return out;
}

RegionPair sample_region_pair(const ImageNorm& image, const ShadowMask& shadow_mask,
                              std::span<const ShadowMask> pool, const SamplingOptions& options,
                              Rng& rng) {
  check_image_mask(image, shadow_mask, "sample_region_pair");
  if (pool.empty()) throw std::invalid_argument("sample_region_pair: empty mask pool");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("sample_region_pair: alpha must lie in (0,1)");
  }
  const ShadowMask lit = shadow_mask.complement();
  if (lit.empty_region()) throw SampleImpossibleError("image is entirely shadow");
  const std::size_t total = shadow_mask.size();
  const std::size_t shadow_area = shadow_mask.area();
  const bool large = 2 * shadow_area > total;
  const double lo = 1.0 - options.alpha;
  const double hi = 1.0 + options.alpha;

  RegionPair pair;
  pair.source_image = image;
  pair.source_mask = shadow_mask;
  pair.shadow_region = mask_region(image, shadow_mask);

  std::optional<ShadowMask> chosen;
  std::optional<ShadowMask> best;
  std::size_t best_index = 0;
  double best_distance = 0;
  auto consider = [&](std::size_t idx) {
    if (!pool[idx].same_size(shadow_mask)) {
      throw std::invalid_argument("sample_region_pair: pool mask size differs from the image");
    }
    ShadowMask candidate = pool[idx].intersect(lit);
    const std::size_t area = candidate.area();
    if (area == 0) return;
    if (large || shadow_area == 0) {
      pair.fallback_used = true;
      pair.fallback_reason = large ? FallbackReason::kLargeShadow : FallbackReason::kNoShadow;
      pair.pool_index = idx;
      chosen = std::move(candidate);
      return;
    }
    const double ratio = static_cast<double>(area) / static_cast<double>(shadow_area);
    if (ratio > lo && ratio < hi) {
      pair.pool_index = idx;
      chosen = std::move(candidate);
      return;
    }
    const double distance = ratio <= lo ? lo - ratio : ratio - hi;
    if (!best || distance < best_distance) {
      best_distance = distance;
      best_index = idx;
      best = std::move(candidate);
    }
  };
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int attempt = 0; attempt < std::max(1, options.max_retries) && !chosen; ++attempt) consider(pick(rng));
  if (!chosen) {
    // Random draws missed: sweep the whole pool in random order so the
    // fallback only happens when no mask qualifies.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size() && !chosen; ++i) consider(order[i]);
  }
  if (!chosen) {
    pair.fallback_used = true;
    pair.fallback_reason = large ? FallbackReason::kLargeShadow
                                 : (shadow_area == 0 ? FallbackReason::kNoShadow
                                                     : FallbackReason::kRetriesExhausted);
    if (best) {
      pair.pool_index = best_index;
      chosen = std::move(best);
    } else {
      // Every candidate fell inside the shadow: use the whole lit area.
      chosen = lit;
    }
  }
  pair.sample_mask = std::move(*chosen);
  pair.nonshadow_region = mask_region(image, pair.sample_mask);
  return pair;
}

AugmentParams draw_augment(const AugmentOptions& options, Rng& rng) {
  if (options.crop_size > options.load_size || options.crop_size <= 0) {
    throw std::invalid_argument("augment: crop size must lie in (0, load_size]");
  }
  std::uniform_int_distribution<int> offset(0, options.load_size - options.crop_size);
  AugmentParams p;
  p.crop_y = offset(rng);
  p.crop_x = offset(rng);
  p.flip = options.flip && std::bernoulli_distribution(0.5)(rng);
  return p;
}

ImageNorm resize_norm(const ImageNorm& image, int height, int width) {
  if (image.height() == height && image.width() == width) return image;
  ImageNorm out = ImageNorm::image(image.channels(), height, width);
  for (int c = 0; c < image.channels(); ++c) {
    cv::Mat src(image.height(), image.width(), CV_32FC1, const_cast<float*>(image.plane(c)));
    cv::Mat dst(height, width, CV_32FC1, out.plane(c));
    cv::resize(src, dst, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  }
  return out;
}

std::pair<ImageNorm, ShadowMask> apply_augment(const ImageNorm& image, const ShadowMask& mask,
                                               const AugmentOptions& options,
                                               const AugmentParams& params) {
  check_image_mask(image, mask, "augment");
  const int s = options.crop_size;
  if (params.crop_y < 0 || params.crop_x < 0 || params.crop_y + s > options.load_size ||
      params.crop_x + s > options.load_size) {
    throw std::invalid_argument("augment: crop window outside the scaled image");
  }
  const ImageNorm scaled = resize_norm(image, options.load_size, options.load_size);
  const ShadowMask scaled_mask = resize_nearest(mask, options.load_size, options.load_size);
  ImageNorm out = ImageNorm::image(image.channels(), s, s);
  ShadowMask out_mask(s, s);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const int sx = params.flip ? params.crop_x + s - 1 - x : params.crop_x + x;
      const int sy = params.crop_y + y;
      for (int c = 0; c < image.channels(); ++c) out.at(c, y, x) = scaled.at(c, sy, sx);
      out_mask.set(y, x, scaled_mask.at(sy, sx));
    }
  }
  return {std::move(out), std::move(out_mask)};
}

std::pair<ImageNorm, ShadowMask> augment(const ImageNorm& image, const ShadowMask& mask,
                                         const AugmentOptions& options, Rng& rng) {
  return apply_augment(image, mask, options, draw_augment(options, rng));
}

ImageNorm outside_region(const ImageNorm& image, const ShadowMask& mask) {
  return mask_region(image, mask.complement());
}

Tensor<float> compose_embed(const ImageNorm& refined, const ImageNorm& image,
                            const ShadowMask& mask) {
  check_image_mask(image, mask, "compose_embed");
  require_same_shape(refined, image, "compose_embed");
  const std::size_t n = mask.size();
  Tensor<float> out = Tensor<float>::image(4, image.height(), image.width());
  for (int c = 0; c < 3; ++c) {
    const float* r = refined.plane(c);
    const float* s = image.plane(c);
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i] && r[i] != 0.0f) {
        throw std::invalid_argument("compose_embed: refined region is nonzero outside its mask");
      }
      dst[i] = mask[i] ? r[i] : s[i];
    }
  }
  float* m = out.plane(3);
  for (std::size_t i = 0; i < n; ++i) m[i] = mask[i] ? 1.0f : 0.0f;
  return out;
}

}  // namespace g2r
