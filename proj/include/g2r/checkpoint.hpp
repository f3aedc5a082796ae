#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "g2r/tensor.hpp"

namespace g2r {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named float32 tensors plus a JSON manifest (config, counters, ...).
///
/// On disk: 8-byte magic, little-endian u64 manifest length, the manifest
/// JSON, then the raw tensor data at the offsets the manifest lists.
struct Checkpoint {
  nlohmann::json manifest = nlohmann::json::object();
  std::map<std::string, Tensor<float>> tensors;

  const Tensor<float>& tensor(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors.count(name) != 0; }
};

/// Writes atomically through a temporary sibling file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace g2r
