#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "g2r/checkpoint.hpp"
#include "g2r/data.hpp"
#include "g2r/metrics.hpp"
#include "g2r/networks.hpp"

namespace g2r {

/// Test-time pipeline: remover on the masked shadow region, splice back into
/// the image, refiner on the 4-channel result. The generator is not used.
class ShadowRemover {
 public:
  ShadowRemover(std::unique_ptr<Network<float>> remover, std::unique_ptr<Network<float>> refiner,
                int size = 256);

  /// Builds both networks from the checkpoint's recorded widths and loads
  /// their parameters.
  static ShadowRemover from_checkpoint(const Checkpoint& ckpt, int size = 256);
  static ShadowRemover from_checkpoint(const std::filesystem::path& path, int size = 256);

  int size() const { return size_; }

  /// Works in network space at the image's own resolution.
  ImageNorm run_norm(const ImageNorm& image, const ShadowMask& mask) const;
  /// Resizes to size x size (bilinear image, nearest mask) and returns the
  /// result at that resolution.
  RgbImage run(const RgbImage& image, const ShadowMask& mask) const;

 private:
  std::unique_ptr<Network<float>> remover_;
  std::unique_ptr<Network<float>> refiner_;
  int size_;
};

/// Reads S and M, runs the pipeline and writes the result.
RgbImage remove_shadow(const std::filesystem::path& image_path,
                       const std::filesystem::path& mask_path,
                       const std::filesystem::path& checkpoint,
                       const std::filesystem::path& out_path, int size = 256);

/// Maps (shadow image, mask used for inference) to an output image.
using Predictor = std::function<RgbImage(const RgbImage&, const ShadowMask&)>;

/// Returns the input resized to size x size: the no-op baseline.
Predictor identity_predictor(int size = 256);
Predictor model_predictor(const ShadowRemover& model);

enum class MaskSource { kGroundTruth, kProvided };

struct EvaluateOptions {
  int size = 256;
  MaskSource mask_source = MaskSource::kGroundTruth;
  /// Directory of masks used for inference when mask_source = kProvided;
  /// files match record stems. Evaluation regions always use GT masks.
  std::optional<std::filesystem::path> provided_masks;
  /// When set, outputs are written here as <stem>.png.
  std::optional<std::filesystem::path> output_dir;
};

/// Scores every record that has a shadow-free image; records without one are
/// skipped with a warning in the report.
MetricsReport evaluate(const DatasetIndex& split, const Predictor& predict,
                       const EvaluateOptions& options = {});

struct VideoOptions {
  int size = 256;
  double threshold = 80.0;
  double dagger_threshold = 40.0;
  std::optional<std::filesystem::path> output_dir;
};

/// Every subdirectory of video_root is one video: its image files are the
/// frames in name order, except an optional vmax.png used as reference.
/// Frames are inferred with their own masks from masks/<stem>.png when
/// present, otherwise with the per-frame shadow mask derived from Vmax.
/// Metrics cover the moving-shadow mask; rmse_dagger uses the mask at the
/// lower threshold. Videos with an empty moving-shadow mask are excluded.
MetricsReport evaluate_video(const std::filesystem::path& video_root, const Predictor& predict,
                             const VideoOptions& options = {});

}  // namespace g2r
