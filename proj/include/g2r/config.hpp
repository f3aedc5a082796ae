#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "g2r/losses.hpp"

namespace g2r {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RealShadowPolicy { kSameImage, kAnyImage };

/// Every training hyperparameter. Defaults reproduce the published setup.
struct TrainConfig {
  // [train]
  int epochs = 100;
  double lr_base = 2e-4;
  int decay_start_epoch = 50;
  double momentum1 = 0.5;
  double momentum2 = 0.999;
  int batch_size = 1;
  double init_std = 0.02;
  std::uint64_t seed = 0;
  bool detach_G_from_I = false;
  bool detach_I_from_R = false;
  bool supervised_mode = false;
  RealShadowPolicy real_shadow_policy = RealShadowPolicy::kAnyImage;
  std::int64_t max_steps = 0;  // 0 = run every epoch to completion
  int checkpoint_keep = 5;
  // [loss]
  LossWeights weights;
  int tau = 50;
  // [data]
  std::string data_root;
  double alpha = 0.2;
  int load_size = 448;
  int crop_size = 400;
  bool flip = true;
  int max_retries = 50;
  int max_records = 0;  // 0 = all
  // [model]
  int base_channels = 64;
  int residual_blocks = 9;
  int disc_channels = 64;
  // [eval]
  int test_size = 256;
  // [output]
  std::string output_dir = "runs";

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Flat "section.key" -> value text.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap to_map(const TrainConfig& cfg);
/// Applies overrides on top of `base`; unknown keys and malformed values
/// raise ConfigError naming the key.
TrainConfig apply_overrides(TrainConfig base, const ConfigMap& values);

/// Reads an INI/TOML-style file ([section] headers, key = value lines, '#'
/// or ';' comments) or a run-manifest JSON carrying a "config" object.
TrainConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const TrainConfig& cfg);
std::string config_text(const TrainConfig& cfg);

/// Stable 64-bit FNV-1a hash of the config text.
std::uint64_t config_hash(const TrainConfig& cfg);

std::string policy_name(RealShadowPolicy p);

}  // namespace g2r
