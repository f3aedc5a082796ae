#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "g2r/checkpoint.hpp"
#include "g2r/config.hpp"
#include "g2r/data.hpp"
#include "g2r/losses.hpp"
#include "g2r/networks.hpp"

namespace g2r {

/// The four trained networks. Only the remover and refiner run at test time.
struct Networks {
  std::unique_ptr<Network<float>> generator;
  std::unique_ptr<Network<float>> remover;
  std::unique_ptr<Network<float>> refiner;
  std::unique_ptr<Network<float>> discriminator;

  std::vector<Network<float>*> all() const;
};

Networks build_networks(const TrainConfig& cfg);

/// Conv weights ~ N(0, std^2), norm scales ~ N(1, std^2), biases and norm
/// shifts 0.
template <typename T>
void init_weights(Network<T>& net, double std, Rng& rng);

double lr_at(int epoch, const TrainConfig& cfg);

template <typename T>
class Adam {
 public:
  Adam(std::vector<ag::Var<T>> params, double beta1, double beta2, double eps = 1e-8);

  /// Applies one update from the accumulated gradients, then clears them.
  void step(double lr);
  void zero_grad();

  std::int64_t steps() const { return t_; }
  void set_steps(std::int64_t t) { t_ = t; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<ag::Var<T>> params_;
  std::vector<Tensor<T>> m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

/// One training example at working resolution.
struct TrainSample {
  RegionPair pair;
  /// Real shadow region shown to the discriminator.
  ImageNorm real_shadow;
  /// Shadow-free image, present in supervised mode.
  std::optional<ImageNorm> shadow_free;
};

enum class LossTerm { kGan, kIden, kRem, kFull, kArea };

/// Generator-side graph of one sample. Unused terms stay undefined.
struct GeneratorGraph {
  ag::Var<float> gan, iden, rem, full, area;
  ag::Var<float> pseudo_shadow;
  ag::Var<float> removed;
  ag::Var<float> refined;

  const ag::Var<float>& term(LossTerm t) const;
};

GeneratorGraph build_generator_graph(const Networks& nets, const TrainSample& sample,
                                     const TrainConfig& cfg);

/// Sum of squared parameter gradients per network after backpropagating a
/// single loss term. Gradients are cleared before and after.
struct GradientProbe {
  double generator = 0, remover = 0, refiner = 0, discriminator = 0;
};

GradientProbe probe_gradients(Networks& nets, const TrainSample& sample, const TrainConfig& cfg,
                              LossTerm term);

struct TrainState {
  int epoch = 0;
  std::int64_t step = 0;
  /// Next position inside the current epoch's shuffled order.
  std::size_t position = 0;
  std::vector<LossBreakdown> history;
};

/// Builds augmented samples from a dataset. Every sample is a pure function
/// of (seed, epoch, position).
class SampleSource {
 public:
  SampleSource(DatasetIndex index, const TrainConfig& cfg);

  std::size_t size() const { return index_.records.size(); }
  std::vector<std::size_t> epoch_order(int epoch) const;
  TrainSample make(int epoch, std::size_t position, std::size_t record) const;

 private:
  struct Loaded {
    ImageNorm image;
    ShadowMask mask;
    std::optional<ImageNorm> shadow_free;
  };
  Loaded load(std::size_t record) const;

  DatasetIndex index_;
  TrainConfig cfg_;
  std::vector<ShadowMask> pool_;
  std::vector<Loaded> cache_;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  /// One generator-side update then one discriminator update. A batch
  /// accumulates gradients over its samples.
  LossBreakdown train_step(std::span<const TrainSample> batch);

  Networks& nets() { return nets_; }
  const Networks& nets() const { return nets_; }
  TrainState& state() { return state_; }
  const TrainConfig& config() const { return cfg_; }
  double learning_rate() const;

  Checkpoint to_checkpoint() const;
  /// Restores parameters, optimizer moments and counters.
  void restore(const Checkpoint& ckpt);

 private:
  TrainConfig cfg_;
  Networks nets_;
  std::unique_ptr<Adam<float>> gen_opt_;
  std::unique_ptr<Adam<float>> dis_opt_;
  TrainState state_;
};

/// Parameters of every network in checkpoint naming ("remover/head.conv.weight").
Checkpoint networks_checkpoint(const Networks& nets);
/// Loads every parameter of `net` from the checkpoint; missing or misshaped
/// entries raise CheckpointError.
void load_network(Network<float>& net, const Checkpoint& ckpt);

struct TrainOutputs {
  std::filesystem::path run_dir;
  std::filesystem::path log_csv;
  std::filesystem::path final_checkpoint;
  std::vector<LossBreakdown> history;
};

struct TrainOptions {
  std::optional<std::filesystem::path> resume_from;
  /// Called after every step; returning false stops training early.
  std::function<bool(const TrainState&, const LossBreakdown&)> on_step;
};

/// Full training loop: seeded per-epoch shuffle, per-step CSV log, per-epoch
/// checkpoints (rolling), final checkpoint and run manifest in run_dir.
TrainOutputs train(const DatasetIndex& dataset, const TrainConfig& cfg,
                   const std::filesystem::path& run_dir, const TrainOptions& options = {});

std::string training_log_header();
std::string training_log_row(std::int64_t step, int epoch, const LossBreakdown& b);

}  // namespace g2r
