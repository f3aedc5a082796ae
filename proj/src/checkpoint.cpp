#include "g2r/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace g2r {
namespace {

constexpr char kMagic[8] = {'G', '2', 'R', 'C', 'K', 'P', 'T', '\x01'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

}  // namespace

const Tensor<float>& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw CheckpointError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json manifest = ckpt.manifest;
  nlohmann::json list = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    list.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * sizeof(float);
  }
  manifest["tensors"] = list;
  const std::string header = manifest.dump();
  const std::uint64_t header_len = header.size();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& [name, t] : ckpt.tensors) {
      out.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(float)));
    }
    out.flush();
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint64_t header_len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  const auto file_size = std::filesystem::file_size(path);
  if (header_len > file_size) throw CheckpointError(path.string() + ": corrupt header");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));

  Checkpoint ckpt;
  try {
    ckpt.manifest = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": bad manifest: " + e.what());
  }
  const std::uint64_t data_start = sizeof kMagic + sizeof header_len + header_len;
  for (const auto& entry : ckpt.manifest.at("tensors")) {
    Tensor<float> t(entry.at("shape").get<std::vector<int>>());
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    if (data_start + offset + t.size() * sizeof(float) > file_size) {
      throw CheckpointError(path.string() + ": truncated tensor " + entry.at("name").get<std::string>());
    }
    in.seekg(static_cast<std::streamoff>(data_start + offset));
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
    ckpt.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
  }
  ckpt.manifest.erase("tensors");
  return ckpt;
}

}  // namespace g2r
