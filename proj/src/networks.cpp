#include "g2r/networks.hpp"

#include <stdexcept>

namespace g2r {

std::string role_name(Role role) {
  switch (role) {
    case Role::kGenerator: return "generator";
    case Role::kRemover: return "remover";
    case Role::kRefiner: return "refiner";
    case Role::kDiscriminator: return "discriminator";
  }
  return "unknown";
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().size();
  return n;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

template <typename T>
void Network<T>::set_trainable(bool on) {
  for (auto& p : params_) p.var.set_requires_grad(on);
}

template <typename T>
std::size_t Network<T>::add_parameter(std::string name, ParamKind kind, Tensor<T> value) {
  params_.push_back({std::move(name), kind, ag::Var<T>::parameter(std::move(value))});
  return params_.size() - 1;
}

template <typename T>
void Network<T>::check_input(const ag::Var<T>& x) const {
  const Tensor<T>& v = x.value();
  if (v.rank() != 3 || v.channels() != in_channels_) {
    throw std::invalid_argument(role_name(role_) + ": expected " + std::to_string(in_channels_) +
                                "-channel [C,H,W] input, got " + shape_string(v.shape()));
  }
}

template <typename T>
Backbone<T>::Backbone(Role role, int in_channels, const BackboneOptions& options)
    : Network<T>(role, in_channels), options_(options) {
  if (role == Role::kDiscriminator) throw std::invalid_argument("Backbone: invalid role");
  if (in_channels != 3 && in_channels != 4) {
    throw std::invalid_argument("Backbone: input channels must be 3 or 4, got " +
                                std::to_string(in_channels));
  }
  if (options.base_channels < 1 || options.residual_blocks < 0) {
    throw std::invalid_argument("Backbone: invalid width or depth");
  }
  const int c = options.base_channels;
  head_ = add_layer("head", in_channels, c, 7, false, true);
  down1_ = add_layer("down1", c, 2 * c, 3, false, true);
  down2_ = add_layer("down2", 2 * c, 4 * c, 3, false, true);
  for (int i = 0; i < options.residual_blocks; ++i) {
    const std::string name = "res" + std::to_string(i + 1);
    Layer a = add_layer(name + ".a", 4 * c, 4 * c, 3, false, true);
    Layer b = add_layer(name + ".b", 4 * c, 4 * c, 3, false, true);
    blocks_.emplace_back(a, b);
  }
  up1_ = add_layer("up1", 4 * c, 2 * c, 3, true, true);
  up2_ = add_layer("up2", 2 * c, c, 3, true, true);
  tail_ = add_layer("tail", c, 3, 7, false, false);
}

template <typename T>
typename Backbone<T>::Layer Backbone<T>::add_layer(const std::string& name, int cin, int cout,
                                                   int k, bool transposed, bool norm) {
  Layer l{};
  const std::vector<int> wshape = transposed ? std::vector<int>{cin, cout, k, k}
                                             : std::vector<int>{cout, cin, k, k};
  l.weight = this->add_parameter(name + ".conv.weight", ParamKind::kConvWeight, Tensor<T>(wshape));
  l.bias = this->add_parameter(name + ".conv.bias", ParamKind::kBias, Tensor<T>({cout}));
  if (norm) {
    l.scale = this->add_parameter(name + ".norm.scale", ParamKind::kNormScale, Tensor<T>({cout}, T(1)));
    l.shift = this->add_parameter(name + ".norm.shift", ParamKind::kNormShift, Tensor<T>({cout}));
  }
  return l;
}

template <typename T>
ag::Var<T> Backbone<T>::forward(const ag::Var<T>& x) const {
  this->check_input(x);
  if (x.value().height() % 4 != 0 || x.value().width() % 4 != 0) {
    throw std::invalid_argument("Backbone: input size must be divisible by 4, got " +
                                shape_string(x.value().shape()));
  }
  auto conv_norm = [this](const ag::Var<T>& in, const Layer& l, const ConvGeometry& g,
                          Activation act) {
    ag::Var<T> y = ag::conv2d(in, this->param(l.weight), this->param(l.bias), g);
    return ag::instance_norm(y, this->param(l.scale), this->param(l.shift), act);
  };
  auto up_norm = [this](const ag::Var<T>& in, const Layer& l) {
    ag::Var<T> y = ag::conv_transpose2d(in, this->param(l.weight), this->param(l.bias), 2, 1, 1);
    return ag::instance_norm(y, this->param(l.scale), this->param(l.shift), Activation::kRelu);
  };
  const ConvGeometry wide{7, 1, 3, PadMode::kReflect};
  const ConvGeometry down{3, 2, 1, PadMode::kZero};
  const ConvGeometry res{3, 1, 1, PadMode::kReflect};

  ag::Var<T> h = conv_norm(x, head_, wide, Activation::kRelu);
  h = conv_norm(h, down1_, down, Activation::kRelu);
  h = conv_norm(h, down2_, down, Activation::kRelu);
  for (const auto& [a, b] : blocks_) {
    ag::Var<T> r = conv_norm(h, a, res, Activation::kRelu);
    r = conv_norm(r, b, res, Activation::kNone);
    h = ag::add(h, r);
  }
  h = up_norm(h, up1_);
  h = up_norm(h, up2_);
  h = ag::conv2d(h, this->param(tail_.weight), this->param(tail_.bias), wide);
  return ag::tanh(h);
}

template <typename T>
PatchDiscriminator<T>::PatchDiscriminator(const DiscriminatorOptions& options)
    : Network<T>(Role::kDiscriminator, 3), options_(options) {
  const int c = options.base_channels;
  const int widths[4] = {c, 2 * c, 4 * c, 8 * c};
  const int strides[4] = {2, 2, 2, 1};
  int cin = 3;
  for (int i = 0; i < 4; ++i) {
    const std::string name = "layer" + std::to_string(i + 1);
    Layer l{};
    l.stride = strides[i];
    l.norm = i > 0 && options.instance_norm;
    l.weight = this->add_parameter(name + ".conv.weight", ParamKind::kConvWeight,
                                   Tensor<T>({widths[i], cin, 4, 4}));
    l.bias = this->add_parameter(name + ".conv.bias", ParamKind::kBias, Tensor<T>({widths[i]}));
    if (l.norm) {
      l.scale = this->add_parameter(name + ".norm.scale", ParamKind::kNormScale,
                                    Tensor<T>({widths[i]}, T(1)));
      l.shift = this->add_parameter(name + ".norm.shift", ParamKind::kNormShift,
                                    Tensor<T>({widths[i]}));
    }
    layers_.push_back(l);
    cin = widths[i];
  }
  score_weight_ = this->add_parameter("score.conv.weight", ParamKind::kConvWeight,
                                      Tensor<T>({1, cin, 4, 4}));
  score_bias_ = this->add_parameter("score.conv.bias", ParamKind::kBias, Tensor<T>({1}));
}

template <typename T>
ag::Var<T> PatchDiscriminator<T>::forward(const ag::Var<T>& x) const {
  this->check_input(x);
  ag::Var<T> h = x;
  for (const Layer& l : layers_) {
    h = ag::conv2d(h, this->param(l.weight), this->param(l.bias),
                   ConvGeometry{4, l.stride, 1, PadMode::kZero});
    if (l.norm) {
      h = ag::instance_norm(h, this->param(l.scale), this->param(l.shift), Activation::kLeakyRelu);
    } else {
      h = ag::activation(h, Activation::kLeakyRelu);
    }
  }
  return ag::conv2d(h, this->param(score_weight_), this->param(score_bias_),
                    ConvGeometry{4, 1, 1, PadMode::kZero});
}

template <typename T>
std::unique_ptr<Network<T>> build_backbone(Role role, int in_channels,
                                           const BackboneOptions& options) {
  return std::make_unique<Backbone<T>>(role, in_channels, options);
}

template <typename T>
std::unique_ptr<Network<T>> build_discriminator(const DiscriminatorOptions& options) {
  return std::make_unique<PatchDiscriminator<T>>(options);
}

template <typename T>
ag::Var<T> forward_generate(const Network<T>& generator, const ag::Var<T>& region,
                            const Tensor<T>& mask) {
  return ag::mask(generator.forward(region), mask);
}

template <typename T>
ag::Var<T> forward_remove(const Network<T>& remover, const ag::Var<T>& region,
                          const Tensor<T>& mask) {
  return ag::mask(remover.forward(region), mask);
}

template <typename T>
ag::Var<T> forward_refine(const Network<T>& refiner, const ag::Var<T>& embedded) {
  return refiner.forward(embedded);
}

template <typename T>
ag::Var<T> forward_discriminate(const Network<T>& discriminator, const ag::Var<T>& region) {
  return discriminator.forward(region);
}

template <typename T>
std::size_t transplant_weights(const Network<T>& from, Network<T>& to) {
  std::size_t touched = 0;
  for (auto& dst : to.parameters()) {
    for (const auto& src : from.parameters()) {
      if (src.name != dst.name) continue;
      const Tensor<T>& s = src.var.value();
      Tensor<T>& d = dst.var.mutable_value();
      if (s.same_shape(d)) {
        d = s;
        ++touched;
      } else if (s.rank() == 4 && d.rank() == 4 && s.dim(0) == d.dim(0) && s.dim(2) == d.dim(2) &&
                 s.dim(3) == d.dim(3)) {
        const int common = std::min(s.dim(1), d.dim(1));
        const std::size_t kk = static_cast<std::size_t>(s.dim(2)) * s.dim(3);
        for (int o = 0; o < s.dim(0); ++o) {
          for (int c = 0; c < common; ++c) {
            const T* sp = s.data() + (static_cast<std::size_t>(o) * s.dim(1) + c) * kk;
            T* dp = d.data() + (static_cast<std::size_t>(o) * d.dim(1) + c) * kk;
            std::copy(sp, sp + kk, dp);
          }
        }
        ++touched;
      }
      break;
    }
  }
  return touched;
}

#define G2R_INSTANTIATE(T)                                                                  \
  template class Network<T>;                                                                 \
  template class Backbone<T>;                                                                \
  template class PatchDiscriminator<T>;                                                      \
  template std::unique_ptr<Network<T>> build_backbone(Role, int, const BackboneOptions&);     \
  template std::unique_ptr<Network<T>> build_discriminator(const DiscriminatorOptions&);     \
  template ag::Var<T> forward_generate(const Network<T>&, const ag::Var<T>&, const Tensor<T>&); \
  template ag::Var<T> forward_remove(const Network<T>&, const ag::Var<T>&, const Tensor<T>&);   \
  template ag::Var<T> forward_refine(const Network<T>&, const ag::Var<T>&);                  \
  template ag::Var<T> forward_discriminate(const Network<T>&, const ag::Var<T>&);            \
  template std::size_t transplant_weights(const Network<T>&, Network<T>&);

G2R_INSTANTIATE(float)
G2R_INSTANTIATE(double)
#undef G2R_INSTANTIATE

}  // namespace g2r
