#include "g2r/inference.hpp"

#include <algorithm>

#include "g2r/config.hpp"
#include "g2r/trainer.hpp"

namespace fs = std::filesystem;

namespace g2r {
namespace {

bool is_frame(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

RgbImage fit(const RgbImage& img, int size) {
  return img.height == size && img.width == size ? img : resize_bilinear(img, size, size);
}

ShadowMask fit(const ShadowMask& m, int size) {
  return m.height() == size && m.width() == size ? m : resize_nearest(m, size, size);
}

}  // namespace

ShadowRemover::ShadowRemover(std::unique_ptr<Network<float>> remover,
                             std::unique_ptr<Network<float>> refiner, int size)
    : remover_(std::move(remover)), refiner_(std::move(refiner)), size_(size) {
  if (!remover_ || !refiner_) throw std::invalid_argument("ShadowRemover: null network");
  if (remover_->in_channels() != 3 || refiner_->in_channels() != 4) {
    throw std::invalid_argument("ShadowRemover: remover takes 3 channels, refiner 4");
  }
  if (size_ <= 0) throw std::invalid_argument("ShadowRemover: size must be positive");
}

ShadowRemover ShadowRemover::from_checkpoint(const Checkpoint& ckpt, int size) {
  TrainConfig cfg;
  if (ckpt.manifest.contains("config")) {
    ConfigMap saved;
    for (const auto& [k, v] : ckpt.manifest.at("config").items()) saved[k] = v.get<std::string>();
    cfg = apply_overrides(cfg, saved);
  }
  const BackboneOptions bb{cfg.base_channels, cfg.residual_blocks};
  auto remover = build_backbone<float>(Role::kRemover, 3, bb);
  auto refiner = build_backbone<float>(Role::kRefiner, 4, bb);
  load_network(*remover, ckpt);
  load_network(*refiner, ckpt);
  remover->set_trainable(false);
  refiner->set_trainable(false);
  return ShadowRemover(std::move(remover), std::move(refiner), size);
}

ShadowRemover ShadowRemover::from_checkpoint(const fs::path& path, int size) {
  return from_checkpoint(load_checkpoint(path), size);
}

ImageNorm ShadowRemover::run_norm(const ImageNorm& image, const ShadowMask& mask) const {
  if (image.height() != mask.height() || image.width() != mask.width()) {
    throw std::invalid_argument("remove_shadow: image and mask sizes differ");
  }
  using V = ag::Var<float>;
  const Tensor<float> m = mask.to_tensor<float>();
  const V removed = forward_remove(*remover_, V::constant(mask_region(image, mask)), m);
  const V refined =
      forward_refine(*refiner_, V::constant(compose_embed(removed.value(), image, mask)));
  return refined.value();
}

RgbImage ShadowRemover::run(const RgbImage& image, const ShadowMask& mask) const {
  if (!mask.same_size(ShadowMask(image.height, image.width))) {
    throw std::invalid_argument("remove_shadow: image and mask sizes differ");
  }
  return norm_to_rgb(run_norm(rgb_to_norm(fit(image, size_)), fit(mask, size_)));
}

RgbImage remove_shadow(const fs::path& image_path, const fs::path& mask_path,
                       const fs::path& checkpoint, const fs::path& out_path, int size) {
  const ShadowRemover model = ShadowRemover::from_checkpoint(checkpoint, size);
  RgbImage out = model.run(read_rgb(image_path), read_mask(mask_path));
  write_rgb(out_path, out);
  return out;
}

Predictor identity_predictor(int size) {
  return [size](const RgbImage& img, const ShadowMask&) { return fit(img, size); };
}

Predictor model_predictor(const ShadowRemover& model) {
  return [&model](const RgbImage& img, const ShadowMask& mask) { return model.run(img, mask); };
}

MetricsReport evaluate(const DatasetIndex& split, const Predictor& predict,
                       const EvaluateOptions& options) {
  MetricsReport report;
  if (options.output_dir) fs::create_directories(*options.output_dir);
  for (const auto& rec : split.records) {
    if (!rec.shadow_free) {
      report.warnings.push_back("skipped " + rec.stem + ": no shadow-free ground truth");
      continue;
    }
    const RgbImage image = read_rgb(rec.image);
    const ShadowMask gt_mask = read_mask(rec.mask);
    ShadowMask infer_mask = gt_mask;
    if (options.mask_source == MaskSource::kProvided) {
      if (!options.provided_masks) throw std::invalid_argument("evaluate: no provided mask directory");
      const fs::path p = *options.provided_masks / (rec.stem + ".png");
      if (!fs::exists(p)) {
        report.warnings.push_back("skipped " + rec.stem + ": no provided mask at " + p.string());
        continue;
      }
      infer_mask = read_mask(p);
    }
    const RgbImage pred = fit(predict(image, infer_mask), options.size);
    const RgbImage gt = fit(read_rgb(*rec.shadow_free), options.size);
    report.per_image.push_back(score_image(rec.stem, pred, gt, fit(gt_mask, options.size)));
    if (options.output_dir) write_rgb(*options.output_dir / (rec.stem + ".png"), pred);
  }
  report.finalize();
  return report;
}

MetricsReport evaluate_video(const fs::path& video_root, const Predictor& predict,
                             const VideoOptions& options) {
  if (!fs::is_directory(video_root)) throw std::invalid_argument("no video directory " + video_root.string());
  MetricsReport report;
  std::vector<fs::path> videos;
  for (const auto& e : fs::directory_iterator(video_root)) {
    if (e.is_directory()) videos.push_back(e.path());
  }
  std::sort(videos.begin(), videos.end());
  for (const auto& dir : videos) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && is_frame(e.path()) && e.path().stem() != "vmax") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    const std::string name = dir.filename().string();
    if (paths.empty()) {
      report.warnings.push_back("excluded video " + name + ": no frames");
      continue;
    }
    std::vector<RgbImage> frames;
    for (const auto& p : paths) frames.push_back(fit(read_rgb(p), options.size));
    const RgbImage reference = fs::exists(dir / "vmax.png") ? fit(read_rgb(dir / "vmax.png"), options.size)
                                                            : vmax(frames);
    const MovingShadow moving = moving_shadow_mask(frames, reference, options.threshold);
    if (moving.moving.empty_region()) {
      report.warnings.push_back("excluded video " + name + ": empty moving-shadow mask");
      continue;
    }
    const MovingShadow dagger = moving_shadow_mask(frames, reference, options.dagger_threshold);
    const ImageLab ref_lab = rgb_to_lab(reference);
    if (options.output_dir) fs::create_directories(*options.output_dir / name);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const fs::path mask_file = dir / "masks" / (paths[i].stem().string() + ".png");
      const ShadowMask infer_mask =
          fs::exists(mask_file) ? fit(read_mask(mask_file), options.size) : moving.per_frame[i];
      const RgbImage pred = fit(predict(frames[i], infer_mask), options.size);
      const ImageLab pred_lab = rgb_to_lab(pred);
      ImageMetrics m;
      m.name = name + "/" + paths[i].stem().string();
      m.rmse_shadow = lab_mae_region(pred_lab, ref_lab, moving.moving);
      m.psnr_shadow = psnr_region(pred, reference, moving.moving);
      m.ssim_shadow = ssim_region(pred, reference, moving.moving);
      if (!dagger.moving.empty_region()) m.rmse_dagger = lab_mae_region(pred_lab, ref_lab, dagger.moving);
      m.shadow_pixels = moving.moving.area();
      m.shadow_abs_sum = *m.rmse_shadow * static_cast<double>(m.shadow_pixels);
      report.per_image.push_back(std::move(m));
      if (options.output_dir) write_rgb(*options.output_dir / name / (paths[i].stem().string() + ".png"), pred);
    }
  }
  report.finalize();
  return report;
}

}  // namespace g2r
