#include "g2r/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace g2r {
namespace {

Rng seeded(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)};
  return Rng(seq);
}

std::vector<ag::Var<float>> collect(std::initializer_list<Network<float>*> nets) {
  std::vector<ag::Var<float>> out;
  for (auto* n : nets) {
    for (auto& p : n->parameters()) out.push_back(p.var);
  }
  return out;
}

std::vector<std::string> collect_names(std::initializer_list<Network<float>*> nets) {
  std::vector<std::string> out;
  for (auto* n : nets) {
    for (auto& p : n->parameters()) out.push_back(role_name(n->role()) + "/" + p.name);
  }
  return out;
}

double grad_energy(const Network<float>& net) {
  double s = 0;
  for (const auto& p : net.parameters()) {
    if (!p.var.has_grad()) continue;
    for (float g : p.var.grad().values()) s += static_cast<double>(g) * g;
  }
  return s;
}

std::uint64_t dataset_hash(const DatasetIndex& index) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& r : index.records) {
    mix(r.stem);
    std::error_code ec;
    mix(std::to_string(fs::file_size(r.image, ec)));
    mix(std::to_string(fs::file_size(r.mask, ec)));
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::vector<Network<float>*> Networks::all() const {
  return {generator.get(), remover.get(), refiner.get(), discriminator.get()};
}

Networks build_networks(const TrainConfig& cfg) {
  const BackboneOptions bb{cfg.base_channels, cfg.residual_blocks};
  Networks n;
  n.generator = build_backbone<float>(Role::kGenerator, 3, bb);
  n.remover = build_backbone<float>(Role::kRemover, 3, bb);
  n.refiner = build_backbone<float>(Role::kRefiner, 4, bb);
  n.discriminator = build_discriminator<float>({cfg.disc_channels, true});
  Rng rng = seeded(cfg.seed, 0x1417, 0, 0);
  for (auto* net : n.all()) init_weights(*net, cfg.init_std, rng);
  return n;
}

template <typename T>
void init_weights(Network<T>& net, double std, Rng& rng) {
  if (!(std > 0) || !std::isfinite(std)) {
    throw std::invalid_argument("init_weights: std must be positive");
  }
  std::normal_distribution<double> normal(0.0, std);
  for (auto& p : net.parameters()) {
    Tensor<T>& v = p.var.mutable_value();
    switch (p.kind) {
      case ParamKind::kConvWeight:
        for (auto& x : v.values()) x = static_cast<T>(normal(rng));
        break;
      case ParamKind::kNormScale:
        for (auto& x : v.values()) x = static_cast<T>(1.0 + normal(rng));
        break;
      case ParamKind::kBias:
      case ParamKind::kNormShift:
        v.fill(T(0));
        break;
    }
  }
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::out_of_range("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(cfg.epochs) + ")");
  }
  if (epoch < cfg.decay_start_epoch) return cfg.lr_base;
  return cfg.lr_base * static_cast<double>(cfg.epochs - epoch) /
         static_cast<double>(cfg.epochs - cfg.decay_start_epoch);
}

template <typename T>
Adam<T>::Adam(std::vector<ag::Var<T>> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value().shape());
    v_.emplace_back(p.value().shape());
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
void Adam<T>::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
  const T step_size = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(eps_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) continue;
    T* w = p.mutable_value().data();
    const T* g = p.grad().data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    const std::size_t n = m_[i].size();
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      w[j] -= step_size * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
    }
    p.zero_grad();
  }
}

const ag::Var<float>& GeneratorGraph::term(LossTerm t) const {
  switch (t) {
    case LossTerm::kGan: return gan;
    case LossTerm::kIden: return iden;
    case LossTerm::kRem: return rem;
    case LossTerm::kFull: return full;
    case LossTerm::kArea: return area;
  }
  return gan;
}

GeneratorGraph build_generator_graph(const Networks& nets, const TrainSample& sample,
                                     const TrainConfig& cfg) {
  using V = ag::Var<float>;
  const RegionPair& pair = sample.pair;
  const V image = V::constant(pair.source_image);
  GeneratorGraph g;

  if (cfg.supervised_mode) {
    if (!sample.shadow_free) throw std::invalid_argument("supervised step needs a shadow-free image");
    const Tensor<float> ms = pair.source_mask.to_tensor<float>();
    const V free = V::constant(*sample.shadow_free);
    g.removed = forward_remove(*nets.remover, V::constant(pair.shadow_region), ms);
    g.rem = loss_removal(g.removed, V::constant(mask_region(*sample.shadow_free, pair.source_mask)));
    const V r_in = cfg.detach_I_from_R ? ag::detach(g.removed) : g.removed;
    const V embedded =
        ag::concat_constant(ag::add_constant(r_in, outside_region(pair.source_image, pair.source_mask)), ms);
    g.refined = forward_refine(*nets.refiner, embedded);
    g.full = loss_full(g.refined, free);
    g.area = loss_area(g.refined, free, pair.source_mask, cfg.tau);
    return g;
  }

  const Tensor<float> m = pair.sample_mask.to_tensor<float>();
  const Tensor<float> ms = pair.source_mask.to_tensor<float>();
  const V nonshadow = V::constant(pair.nonshadow_region);
  const V shadow = V::constant(pair.shadow_region);

  g.pseudo_shadow = forward_generate(*nets.generator, nonshadow, m);
  g.gan = loss_gen(forward_discriminate(*nets.discriminator, g.pseudo_shadow));
  g.iden = loss_identity(forward_generate(*nets.generator, shadow, ms), shadow);

  const V i_in = cfg.detach_G_from_I ? ag::detach(g.pseudo_shadow) : g.pseudo_shadow;
  g.removed = forward_remove(*nets.remover, i_in, m);
  g.rem = loss_removal(g.removed, nonshadow);

  const V r_in = cfg.detach_I_from_R ? ag::detach(g.removed) : g.removed;
  const V embedded =
      ag::concat_constant(ag::add_constant(r_in, outside_region(pair.source_image, pair.sample_mask)), m);
  g.refined = forward_refine(*nets.refiner, embedded);
  g.full = loss_full(g.refined, image);
  g.area = loss_area(g.refined, image, pair.sample_mask, cfg.tau);
  return g;
}

GradientProbe probe_gradients(Networks& nets, const TrainSample& sample, const TrainConfig& cfg,
                              LossTerm term) {
  for (auto* n : nets.all()) {
    n->set_trainable(true);
    n->zero_grad();
  }
  {
    const GeneratorGraph g = build_generator_graph(nets, sample, cfg);
    const auto& v = g.term(term);
    if (v.defined()) ag::backward(v);
  }
  GradientProbe p;
  p.generator = grad_energy(*nets.generator);
  p.remover = grad_energy(*nets.remover);
  p.refiner = grad_energy(*nets.refiner);
  p.discriminator = grad_energy(*nets.discriminator);
  for (auto* n : nets.all()) n->zero_grad();
  return p;
}

SampleSource::SampleSource(DatasetIndex index, const TrainConfig& cfg)
    : index_(std::move(index)), cfg_(cfg) {
  if (cfg_.max_records > 0 && index_.records.size() > static_cast<std::size_t>(cfg_.max_records)) {
    index_.records.resize(static_cast<std::size_t>(cfg_.max_records));
    index_.mask_pool.clear();
    for (const auto& r : index_.records) index_.mask_pool.push_back(r.mask);
  }
  if (index_.records.empty()) throw DatasetError("training split is empty: " + index_.root.string());
  if (cfg_.supervised_mode) {
    for (const auto& r : index_.records) {
      if (!r.shadow_free) throw DatasetError("supervised mode needs a shadow-free image for " + r.stem);
    }
  }
  for (const auto& path : index_.mask_pool) {
    pool_.push_back(resize_nearest(read_mask(path), cfg_.crop_size, cfg_.crop_size));
  }
  // Keep decoded images in memory when they fit in a modest budget.
  const Loaded first = load(0);
  const std::size_t per_record = first.image.size() * sizeof(float) * (first.shadow_free ? 2 : 1);
  constexpr std::size_t kCacheBudget = std::size_t{1} << 29;
  if (per_record * index_.records.size() <= kCacheBudget) {
    for (std::size_t i = 0; i < index_.records.size(); ++i) cache_.push_back(load(i));
  }
}

SampleSource::Loaded SampleSource::load(std::size_t record) const {
  if (record < cache_.size()) return cache_[record];
  const auto& r = index_.records.at(record);
  Loaded out;
  out.image = load_image_norm(r.image);
  out.mask = read_mask(r.mask);
  if (cfg_.supervised_mode && r.shadow_free) out.shadow_free = load_image_norm(*r.shadow_free);
  return out;
}

std::vector<std::size_t> SampleSource::epoch_order(int epoch) const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = seeded(cfg_.seed, 0x5EED, static_cast<std::uint64_t>(epoch), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainSample SampleSource::make(int epoch, std::size_t position, std::size_t record) const {
  Rng rng = seeded(cfg_.seed, 0xDA7A, static_cast<std::uint64_t>(epoch), position);
  const AugmentOptions aug{cfg_.load_size, cfg_.crop_size, cfg_.flip};
  const Loaded src = load(record);
  const AugmentParams params = draw_augment(aug, rng);
  auto [image, mask] = apply_augment(src.image, src.mask, aug, params);

  TrainSample s;
  if (cfg_.supervised_mode) {
    s.shadow_free = apply_augment(*src.shadow_free, src.mask, aug, params).first;
    s.pair.source_image = image;
    s.pair.source_mask = mask;
    s.pair.shadow_region = mask_region(image, mask);
    s.pair.sample_mask = mask;
    s.real_shadow = s.pair.shadow_region;
    return s;
  }
  s.pair = sample_region_pair(image, mask, pool_, {cfg_.alpha, cfg_.max_retries}, rng);
  if (cfg_.real_shadow_policy == RealShadowPolicy::kSameImage) {
    s.real_shadow = s.pair.shadow_region;
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
    const Loaded other = load(pick(rng));
    auto [oi, om] = apply_augment(other.image, other.mask, aug, draw_augment(aug, rng));
    s.real_shadow = mask_region(oi, om);
  }
  return s;
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)), nets_(build_networks(cfg_)) {
  cfg_.validate();
  gen_opt_ = std::make_unique<Adam<float>>(
      collect({nets_.generator.get(), nets_.remover.get(), nets_.refiner.get()}), cfg_.momentum1,
      cfg_.momentum2);
  dis_opt_ = std::make_unique<Adam<float>>(collect({nets_.discriminator.get()}), cfg_.momentum1,
                                           cfg_.momentum2);
}

double Trainer::learning_rate() const {
  return lr_at(std::min(state_.epoch, cfg_.epochs - 1), cfg_);
}

LossBreakdown Trainer::train_step(std::span<const TrainSample> batch) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const double lr = learning_rate();
  const double share = 1.0 / static_cast<double>(batch.size());
  const auto& w = cfg_.weights;

  // Generator side: G, I, R jointly; D only passes gradients through.
  nets_.generator->set_trainable(true);
  nets_.remover->set_trainable(true);
  nets_.refiner->set_trainable(true);
  nets_.discriminator->set_trainable(false);
  LossComponents mean;
  std::vector<Tensor<float>> fakes;
  for (const auto& sample : batch) {
    const GeneratorGraph g = build_generator_graph(nets_, sample, cfg_);
    LossComponents c;
    auto val = [](const ag::Var<float>& v) { return v.defined() ? static_cast<double>(v.item()) : 0.0; };
    c.gan = val(g.gan);
    c.iden = val(g.iden);
    c.rem = val(g.rem);
    c.full = val(g.full);
    c.area = val(g.area);
    total_loss(c, w);  // throws on divergence before any update

    std::vector<ag::Var<float>> terms;
    std::vector<double> weights;
    const std::pair<const ag::Var<float>*, double> parts[] = {
        {&g.gan, w.gan}, {&g.iden, w.iden}, {&g.rem, w.rem}, {&g.full, w.full}, {&g.area, w.area}};
    for (const auto& [v, wt] : parts) {
      if (v->defined() && wt != 0.0) {
        terms.push_back(*v);
        weights.push_back(wt * share);
      }
    }
    if (!terms.empty()) ag::backward(ag::weighted_sum<float>(terms, weights));
    mean.gan += c.gan * share;
    mean.iden += c.iden * share;
    mean.rem += c.rem * share;
    mean.full += c.full * share;
    mean.area += c.area * share;
    if (g.pseudo_shadow.defined()) fakes.push_back(g.pseudo_shadow.value());
  }
  gen_opt_->step(lr);

  // Discriminator side on detached fakes.
  if (!fakes.empty()) {
    nets_.generator->set_trainable(false);
    nets_.remover->set_trainable(false);
    nets_.refiner->set_trainable(false);
    nets_.discriminator->set_trainable(true);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      using V = ag::Var<float>;
      const V fake = forward_discriminate(*nets_.discriminator, V::constant(fakes[i]));
      const V real = forward_discriminate(*nets_.discriminator, V::constant(batch[i].real_shadow));
      const V dis = loss_dis(fake, real);
      if (!std::isfinite(dis.item())) throw TrainingDivergenceError("dis", dis.item());
      mean.dis += dis.item() * share;
      const V scaled[] = {dis};
      const double s[] = {share};
      ag::backward(ag::weighted_sum<float>(scaled, s));
    }
    dis_opt_->step(lr);
  }
  for (auto* n : nets_.all()) n->set_trainable(true);

  LossBreakdown out = total_loss(mean, w);
  out.dis = mean.dis;
  ++state_.step;
  state_.history.push_back(out);
  return out;
}

Checkpoint networks_checkpoint(const Networks& nets) {
  Checkpoint ckpt;
  for (auto* n : nets.all()) {
    for (const auto& p : n->parameters()) {
      ckpt.tensors.emplace(role_name(n->role()) + "/" + p.name, p.var.value());
    }
  }
  return ckpt;
}

void load_network(Network<float>& net, const Checkpoint& ckpt) {
  for (auto& p : net.parameters()) {
    const std::string name = role_name(net.role()) + "/" + p.name;
    const Tensor<float>& t = ckpt.tensor(name);
    if (!t.same_shape(p.var.value())) {
      throw CheckpointError("checkpoint tensor '" + name + "' has shape " + shape_string(t.shape()) +
                            ", network expects " + shape_string(p.var.value().shape()));
    }
    p.var.mutable_value() = t;
  }
}

Checkpoint Trainer::to_checkpoint() const {
  Checkpoint ckpt = networks_checkpoint(nets_);
  auto store = [&ckpt](const std::string& prefix, Adam<float>& opt,
                       const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      ckpt.tensors.emplace(prefix + "/m/" + names[i], opt.first_moments()[i]);
      ckpt.tensors.emplace(prefix + "/v/" + names[i], opt.second_moments()[i]);
    }
  };
  store("adam_gen", *gen_opt_,
        collect_names({nets_.generator.get(), nets_.remover.get(), nets_.refiner.get()}));
  store("adam_dis", *dis_opt_, collect_names({nets_.discriminator.get()}));
  nlohmann::json cfg_json = nlohmann::json::object();
  for (const auto& [k, v] : to_map(cfg_)) cfg_json[k] = v;
  ckpt.manifest["format"] = "g2r-checkpoint";
  ckpt.manifest["config"] = cfg_json;
  ckpt.manifest["state"] = {{"epoch", state_.epoch},
                            {"step", state_.step},
                            {"position", state_.position},
                            {"adam_gen_steps", gen_opt_->steps()},
                            {"adam_dis_steps", dis_opt_->steps()}};
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  for (auto* n : nets_.all()) load_network(*n, ckpt);
  auto load = [&ckpt](const std::string& prefix, Adam<float>& opt,
                      const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      opt.first_moments()[i] = ckpt.tensor(prefix + "/m/" + names[i]);
      opt.second_moments()[i] = ckpt.tensor(prefix + "/v/" + names[i]);
    }
  };
  load("adam_gen", *gen_opt_,
       collect_names({nets_.generator.get(), nets_.remover.get(), nets_.refiner.get()}));
  load("adam_dis", *dis_opt_, collect_names({nets_.discriminator.get()}));
  const auto& s = ckpt.manifest.at("state");
  state_.epoch = s.at("epoch").get<int>();
  state_.step = s.at("step").get<std::int64_t>();
  state_.position = s.at("position").get<std::size_t>();
  gen_opt_->set_steps(s.at("adam_gen_steps").get<std::int64_t>());
  dis_opt_->set_steps(s.at("adam_dis_steps").get<std::int64_t>());
}

std::string training_log_header() { return "step,epoch,gan,iden,rem,full,area,total,dis"; }

std::string training_log_row(std::int64_t step, int epoch, const LossBreakdown& b) {
  std::ostringstream os;
  os << std::setprecision(9) << step << ',' << epoch << ',' << b.gan << ',' << b.iden << ','
     << b.rem << ',' << b.full << ',' << b.area << ',' << b.total << ',' << b.dis;
  return os.str();
}

TrainOutputs train(const DatasetIndex& dataset, const TrainConfig& cfg, const fs::path& run_dir,
                   const TrainOptions& options) {
  cfg.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  SampleSource source(dataset, cfg);
  Trainer trainer(cfg);

  TrainOutputs out;
  out.run_dir = run_dir;
  out.log_csv = run_dir / "training_log.csv";
  fs::create_directories(run_dir / "checkpoints");
  save_config(run_dir / "config.ini", cfg);

  if (options.resume_from) {
    const Checkpoint ckpt = load_checkpoint(*options.resume_from);
    ConfigMap saved;
    for (const auto& [k, v] : ckpt.manifest.at("config").items()) saved[k] = v.get<std::string>();
    TrainConfig previous = apply_overrides(TrainConfig{}, saved);
    previous.max_steps = cfg.max_steps;
    previous.epochs = cfg.epochs;
    previous.decay_start_epoch = cfg.decay_start_epoch;
    previous.output_dir = cfg.output_dir;
    previous.data_root = cfg.data_root;
    if (!(previous == cfg)) {
      throw ConfigError("resume: checkpoint was trained with a different configuration");
    }
    trainer.restore(ckpt);
    // Drop log rows written after the checkpoint.
    std::vector<std::string> kept;
    if (std::ifstream in(out.log_csv); in) {
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (!line.empty() && std::stoll(line.substr(0, line.find(','))) <= trainer.state().step) {
          kept.push_back(line);
        }
      }
    }
    std::ofstream log(out.log_csv, std::ios::trunc);
    log << training_log_header() << '\n';
    for (const auto& l : kept) log << l << '\n';
  } else {
    std::ofstream log(out.log_csv, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write " + out.log_csv.string());
    log << training_log_header() << '\n';
  }

  std::ofstream log(out.log_csv, std::ios::app);
  TrainState& state = trainer.state();
  std::vector<fs::path> rolling;
  bool stop = false;
  auto save_to = [&](const fs::path& path) {
    save_checkpoint(path, trainer.to_checkpoint());
    if (!fs::exists(path)) throw std::runtime_error("checkpoint missing after write: " + path.string());
  };

  while (!stop && state.epoch < cfg.epochs) {
    const auto order = source.epoch_order(state.epoch);
    while (state.position < order.size()) {
      if (cfg.max_steps > 0 && state.step >= cfg.max_steps) {
        stop = true;
        break;
      }
      std::vector<TrainSample> batch;
      const std::size_t end = std::min(order.size(), state.position + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t p = state.position; p < end; ++p) {
        batch.push_back(source.make(state.epoch, p, order[p]));
      }
      const LossBreakdown b = trainer.train_step(batch);
      state.position = end;
      out.history.push_back(b);
      log << training_log_row(state.step, state.epoch, b) << '\n';
      log.flush();
      if (!log) throw std::runtime_error("cannot append to " + out.log_csv.string());
      if (options.on_step && !options.on_step(state, b)) {
        stop = true;
        break;
      }
    }
    if (state.position >= order.size()) {
      ++state.epoch;
      state.position = 0;
      std::ostringstream name;
      name << "epoch_" << std::setw(3) << std::setfill('0') << state.epoch << ".ckpt";
      const fs::path path = run_dir / "checkpoints" / name.str();
      save_to(path);
      rolling.push_back(path);
      while (rolling.size() > static_cast<std::size_t>(cfg.checkpoint_keep)) {
        fs::remove(rolling.front());
        rolling.erase(rolling.begin());
      }
    }
  }
  out.final_checkpoint = run_dir / "final.ckpt";
  save_to(out.final_checkpoint);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  nlohmann::json manifest;
  nlohmann::json cfg_json = nlohmann::json::object();
  for (const auto& [k, v] : to_map(cfg)) cfg_json[k] = v;
  manifest["config"] = cfg_json;
  manifest["config_hash"] = hex(config_hash(cfg));
  manifest["seed"] = cfg.seed;
  manifest["dataset_root"] = dataset.root.string();
  manifest["dataset_records"] = source.size();
  manifest["dataset_hash"] = hex(dataset_hash(dataset));
  manifest["steps"] = state.step;
  manifest["epochs_completed"] = state.epoch;
  manifest["wall_clock_seconds"] = seconds;
  manifest["resumed_from"] = options.resume_from ? options.resume_from->string() : "";
  manifest["final_checkpoint"] = out.final_checkpoint.string();
  manifest["training_log"] = out.log_csv.string();
  std::ofstream(run_dir / "run_manifest.json") << manifest.dump(2) << '\n';
  return out;
}

template void init_weights(Network<float>&, double, Rng&);
template void init_weights(Network<double>&, double, Rng&);
template class Adam<float>;
template class Adam<double>;

}  // namespace g2r
