#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "g2r/config.hpp"

namespace g2r {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Environment variable naming the default dataset root.
inline constexpr const char* kDataRootEnv = "G2R_DATA_ROOT";

/// Runs one command; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

struct AblationVariant {
  std::string name;
  TrainConfig config;
};

/// Expands a comma-separated list of grids ("detach", "tau", "loss") into
/// training configurations derived from `base`.
std::vector<AblationVariant> ablation_variants(const std::string& matrix, const TrainConfig& base);

/// <parent>/<YYYYmmdd-HHMMSS>-<hash>, made unique with a numeric suffix.
std::filesystem::path make_run_dir(const std::filesystem::path& parent, std::uint64_t hash);

}  // namespace g2r
