#pragma once

#include <cstdint>
#include <filesystem>

#include "g2r/image.hpp"

namespace g2r::testing {

struct SyntheticTriplet {
  RgbImage shadow;
  ShadowMask mask;
  RgbImage shadow_free;
};

/// Smooth textured scene with one darkened blob. Shadow pixels are the
/// shadow-free ones scaled per channel (bluish, as under skylight).
SyntheticTriplet synthetic_triplet(int height, int width, std::uint64_t seed);

/// One wobbly elliptical shadow placed anywhere in the frame, covering
/// roughly 1-25% of it.
ShadowMask synthetic_mask(int height, int width, std::uint64_t seed);

/// Writes an ISTD-style tree: <split>_A / _B / _C with PNG files 000.png...
void write_synthetic_split(const std::filesystem::path& root, const std::string& split, int count,
                           int height, int width, std::uint64_t seed);

/// Fresh directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace g2r::testing
