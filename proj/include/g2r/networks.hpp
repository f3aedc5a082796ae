#pragma once

#include <memory>
#include <string>
#include <vector>

#include "g2r/autograd.hpp"

namespace g2r {

enum class Role { kGenerator, kRemover, kRefiner, kDiscriminator };

std::string role_name(Role role);

enum class ParamKind { kConvWeight, kBias, kNormScale, kNormShift };

template <typename T>
struct NamedParameter {
  std::string name;
  ParamKind kind;
  ag::Var<T> var;
};

/// A trainable network with a single-image forward map.
template <typename T>
class Network {
 public:
  Network(Role role, int in_channels) : role_(role), in_channels_(in_channels) {}
  virtual ~Network() = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Role role() const { return role_; }
  int in_channels() const { return in_channels_; }

  virtual ag::Var<T> forward(const ag::Var<T>& x) const = 0;

  std::vector<NamedParameter<T>>& parameters() { return params_; }
  const std::vector<NamedParameter<T>>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();
  /// Toggles gradient accumulation for every parameter.
  void set_trainable(bool on);

 protected:
  std::size_t add_parameter(std::string name, ParamKind kind, Tensor<T> value);
  const ag::Var<T>& param(std::size_t i) const { return params_[i].var; }
  void check_input(const ag::Var<T>& x) const;

 private:
  Role role_;
  int in_channels_;
  std::vector<NamedParameter<T>> params_;
};

struct BackboneOptions {
  int base_channels = 64;
  int residual_blocks = 9;
};

/// Encoder / residual / decoder image-to-image network: 7x7 head, two
/// stride-2 downsampling convs, residual blocks, two stride-2 transposed
/// convs, 7x7 tail with tanh. Instance norm follows every conv but the tail.
template <typename T>
class Backbone final : public Network<T> {
 public:
  Backbone(Role role, int in_channels, const BackboneOptions& options = {});
  ag::Var<T> forward(const ag::Var<T>& x) const override;
  const BackboneOptions& options() const { return options_; }

 private:
  struct Layer {
    std::size_t weight, bias, scale, shift;
  };
  Layer add_layer(const std::string& name, int cin, int cout, int k, bool transposed, bool norm);

  BackboneOptions options_;
  Layer head_, down1_, down2_, up1_, up2_, tail_;
  std::vector<std::pair<Layer, Layer>> blocks_;
};

struct DiscriminatorOptions {
  int base_channels = 64;
  /// Off only for receptive-field probes: normalization couples every
  /// output cell to the whole input.
  bool instance_norm = true;
};

/// 70x70 patch discriminator: 4x4 convs with 64/128/256 channels at stride
/// 2, 512 at stride 1, then a 1-channel stride-1 score conv.
template <typename T>
class PatchDiscriminator final : public Network<T> {
 public:
  explicit PatchDiscriminator(const DiscriminatorOptions& options = {});
  ag::Var<T> forward(const ag::Var<T>& x) const override;

 private:
  struct Layer {
    std::size_t weight, bias, scale, shift;
    int stride;
    bool norm;
  };
  DiscriminatorOptions options_;
  std::vector<Layer> layers_;
  std::size_t score_weight_ = 0, score_bias_ = 0;
};

/// Generator / remover take 3 channels, the refiner 4.
template <typename T>
std::unique_ptr<Network<T>> build_backbone(Role role, int in_channels,
                                           const BackboneOptions& options = {});

template <typename T>
std::unique_ptr<Network<T>> build_discriminator(const DiscriminatorOptions& options = {});

/// G(R_n) re-masked so the pseudo shadow exists only inside the region.
template <typename T>
ag::Var<T> forward_generate(const Network<T>& generator, const ag::Var<T>& region,
                            const Tensor<T>& mask);

template <typename T>
ag::Var<T> forward_remove(const Network<T>& remover, const ag::Var<T>& region,
                          const Tensor<T>& mask);

template <typename T>
ag::Var<T> forward_refine(const Network<T>& refiner, const ag::Var<T>& embedded);

template <typename T>
ag::Var<T> forward_discriminate(const Network<T>& discriminator, const ag::Var<T>& region);

/// Copies every parameter whose name and shape agree. A 4-channel input conv
/// receiving a 3-channel one gets its first three input slices overwritten.
/// Returns the number of parameters touched.
template <typename T>
std::size_t transplant_weights(const Network<T>& from, Network<T>& to);

}  // namespace g2r
