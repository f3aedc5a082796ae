#include "g2r/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "g2r/inference.hpp"
#include "g2r/trainer.hpp"

namespace fs = std::filesystem;

namespace g2r {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ConfigMap parse_sets(const std::vector<std::string>& sets) {
  ConfigMap out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

TrainConfig resolve_config(const std::string& path, const std::vector<std::string>& sets,
                           const std::string& data_root, const std::string& output_dir) {
  TrainConfig cfg = path.empty() ? TrainConfig{} : load_config(path);
  cfg = apply_overrides(cfg, parse_sets(sets));
  if (!data_root.empty()) cfg.data_root = data_root;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (cfg.data_root.empty()) {
    if (const char* env = std::getenv(kDataRootEnv)) cfg.data_root = env;
  }
  cfg.validate();
  return cfg;
}

std::string require_data_root(const std::string& root) {
  if (!root.empty()) return root;
  if (const char* env = std::getenv(kDataRootEnv)) return env;
  throw UsageError(std::string("no dataset root: pass --data-root, set data.root, or set ") + kDataRootEnv);
}

void require_path(const std::string& p, const char* what) {
  if (!fs::exists(p)) throw UsageError(std::string(what) + " not found: " + p);
}

double mean_tail(const std::vector<LossBreakdown>& h, std::size_t n) {
  if (h.empty()) return 0;
  n = std::min(n, h.size());
  double s = 0;
  for (std::size_t i = h.size() - n; i < h.size(); ++i) s += h[i].total;
  return s / static_cast<double>(n);
}

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(6) << *v;
  return os.str();
}

int cmd_train(const std::string& config, const std::vector<std::string>& sets, const std::string& data_root,
              const std::string& output_dir, const std::string& resume, const std::string& run_dir_arg) {
  const TrainConfig cfg = resolve_config(config, sets, data_root, output_dir);
  if (cfg.data_root.empty()) throw UsageError(std::string("no dataset root: set data.root or ") + kDataRootEnv);
  const DatasetIndex index = load_dataset(cfg.data_root, Split::kTrain);
  fs::path run_dir = run_dir_arg.empty() ? make_run_dir(cfg.output_dir, config_hash(cfg)) : fs::path(run_dir_arg);
  TrainOptions options;
  if (!resume.empty()) {
    require_path(resume, "checkpoint");
    options.resume_from = resume;
    if (run_dir_arg.empty()) run_dir = fs::path(resume).parent_path().filename() == "checkpoints"
                                           ? fs::path(resume).parent_path().parent_path()
                                           : fs::path(resume).parent_path();
  }
  const TrainOutputs out = train(index, cfg, run_dir, options);
  std::cout << "run directory: " << out.run_dir.string() << '\n'
            << "final checkpoint: " << out.final_checkpoint.string() << '\n'
            << "training log: " << out.log_csv.string() << '\n';
  return kExitOk;
}

int cmd_infer(const std::string& ckpt, const std::string& image, const std::string& mask,
              const std::string& out, int size) {
  require_path(ckpt, "checkpoint");
  require_path(image, "image");
  require_path(mask, "mask");
  remove_shadow(image, mask, ckpt, out, size);
  std::cout << "wrote " << out << '\n';
  return kExitOk;
}

void write_report(const MetricsReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  report.write_csv(dir / "metrics.csv");
  report.write_json(dir / "metrics.json");
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const auto& m = report.mean;
  std::cout << "images: " << report.per_image.size() << '\n'
            << "shadow  RMSE " << opt(m.rmse_shadow) << "  PSNR " << opt(m.psnr_shadow) << "  SSIM "
            << opt(m.ssim_shadow) << '\n'
            << "non-sh. RMSE " << opt(m.rmse_nonshadow) << "  PSNR " << opt(m.psnr_nonshadow)
            << "  SSIM " << opt(m.ssim_nonshadow) << '\n'
            << "all     RMSE " << opt(m.rmse_all) << "  PSNR " << opt(m.psnr_all) << "  SSIM "
            << opt(m.ssim_all) << '\n'
            << "report: " << (dir / "metrics.csv").string() << '\n';
}

int cmd_eval(const std::string& ckpt, const std::string& data_root, const std::string& split,
             const std::string& mask_source, const std::string& masks, const std::string& output_dir,
             int size, bool baseline) {
  const std::string root = require_data_root(data_root);
  if (split != "train" && split != "test") throw UsageError("--split must be train or test");
  const DatasetIndex index = load_dataset(root, split == "train" ? Split::kTrain : Split::kTest);
  EvaluateOptions options;
  options.size = size;
  if (mask_source == "provided") {
    if (masks.empty()) throw UsageError("--mask-source provided needs --masks");
    require_path(masks, "mask directory");
    options.mask_source = MaskSource::kProvided;
    options.provided_masks = masks;
  } else if (mask_source != "gt") {
    throw UsageError("--mask-source must be gt or provided");
  }
  const fs::path run_dir = make_run_dir(output_dir, fnv("eval|" + ckpt + "|" + root + "|" + split + "|" +
                                                        mask_source + "|" + masks + "|" + std::to_string(size)));
  options.output_dir = run_dir / "images";
  MetricsReport report;
  if (baseline) {
    report = evaluate(index, identity_predictor(size), options);
  } else {
    require_path(ckpt, "checkpoint");
    const ShadowRemover model = ShadowRemover::from_checkpoint(fs::path(ckpt), size);
    report = evaluate(index, model_predictor(model), options);
  }
  write_report(report, run_dir);
  return kExitOk;
}

int cmd_eval_video(const std::string& ckpt, const std::string& video_root, double threshold,
                   const std::string& output_dir, int size, bool baseline) {
  require_path(video_root, "video root");
  VideoOptions options;
  options.size = size;
  options.threshold = threshold;
  const fs::path run_dir =
      make_run_dir(output_dir, fnv("video|" + ckpt + "|" + video_root + "|" + std::to_string(threshold)));
  options.output_dir = run_dir / "frames";
  MetricsReport report;
  if (baseline) {
    report = evaluate_video(video_root, identity_predictor(size), options);
  } else {
    require_path(ckpt, "checkpoint");
    const ShadowRemover model = ShadowRemover::from_checkpoint(fs::path(ckpt), size);
    report = evaluate_video(video_root, model_predictor(model), options);
  }
  write_report(report, run_dir);
  return kExitOk;
}

struct AblationRow {
  std::string name;
  TrainConfig cfg;
  std::int64_t steps = 0;
  double first_total = 0, last_total = 0;
  std::optional<ImageMetrics> eval;
  std::string run_dir;
};

AblationRow run_variant(const AblationVariant& v, const fs::path& dir) {
  AblationRow row{v.name, v.config};
  const DatasetIndex index = load_dataset(v.config.data_root, Split::kTrain);
  const TrainOutputs out = train(index, v.config, dir);
  row.steps = static_cast<std::int64_t>(out.history.size());
  row.last_total = mean_tail(out.history, 10);
  std::vector<LossBreakdown> head(out.history.begin(),
                                  out.history.begin() + static_cast<long>(std::min<std::size_t>(10, out.history.size())));
  row.first_total = mean_tail(head, 10);
  row.run_dir = dir.string();
  const fs::path root = v.config.data_root;
  if (fs::is_directory(root / "test_A") && fs::is_directory(root / "test_C")) {
    const DatasetIndex test = load_dataset(root, Split::kTest);
    const ShadowRemover model = ShadowRemover::from_checkpoint(out.final_checkpoint, v.config.test_size);
    EvaluateOptions eo;
    eo.size = v.config.test_size;
    MetricsReport report = evaluate(test, model_predictor(model), eo);
    report.write_csv(dir / "metrics.csv");
    row.eval = report.mean;
  }
  return row;
}

int cmd_ablate(const std::string& config, const std::vector<std::string>& sets, const std::string& data_root,
               const std::string& output_dir, const std::string& matrix, int workers) {
  const TrainConfig base = resolve_config(config, sets, data_root, output_dir);
  if (base.data_root.empty()) throw UsageError(std::string("no dataset root: set data.root or ") + kDataRootEnv);
  if (workers <= 0) throw UsageError("--workers must be positive");
  const auto variants = ablation_variants(matrix, base);
  const fs::path root = make_run_dir(base.output_dir, config_hash(base) ^ fnv(matrix));

  std::vector<AblationRow> rows(variants.size());
  std::size_t next = 0;
  while (next < variants.size()) {
    std::vector<std::future<AblationRow>> jobs;
    for (int w = 0; w < workers && next < variants.size(); ++w, ++next) {
      const auto& v = variants[next];
      jobs.push_back(std::async(workers == 1 ? std::launch::deferred : std::launch::async,
                                [&v, dir = root / v.name] { return run_variant(v, dir); }));
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      rows[next - jobs.size() + j] = jobs[j].get();
      std::cout << "finished " << rows[next - jobs.size() + j].name << '\n';
    }
  }

  std::ofstream csv(root / "ablation.csv");
  csv << "variant,detach_G_from_I,detach_I_from_R,tau,w_gan,w_iden,w_rem,w_full,w_area,steps,"
         "first10_total,last10_total,rmse_shadow,psnr_shadow,ssim_shadow,rmse_all,psnr_all,ssim_all,run_dir\n";
  for (const auto& r : rows) {
    const auto& c = r.cfg;
    csv << r.name << ',' << c.detach_G_from_I << ',' << c.detach_I_from_R << ',' << c.tau << ','
        << c.weights.gan << ',' << c.weights.iden << ',' << c.weights.rem << ',' << c.weights.full << ','
        << c.weights.area << ',' << r.steps << ',' << r.first_total << ',' << r.last_total;
    if (r.eval) {
      csv << ',' << opt(r.eval->rmse_shadow) << ',' << opt(r.eval->psnr_shadow) << ','
          << opt(r.eval->ssim_shadow) << ',' << opt(r.eval->rmse_all) << ',' << opt(r.eval->psnr_all) << ','
          << opt(r.eval->ssim_all);
    } else {
      csv << ",,,,,,";
    }
    csv << ',' << r.run_dir << '\n';
  }
  std::cout << "merged table: " << (root / "ablation.csv").string() << '\n';
  return kExitOk;
}

std::map<std::string, fs::path> by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace(e.path().stem().string(), e.path());
  }
  return out;
}

int cmd_metrics(const std::string& pred_dir, const std::string& gt_dir, const std::string& mask_dir,
                const std::string& output_dir) {
  require_path(pred_dir, "prediction directory");
  require_path(gt_dir, "ground-truth directory");
  require_path(mask_dir, "mask directory");
  const auto preds = by_stem(pred_dir);
  const auto gts = by_stem(gt_dir);
  const auto masks = by_stem(mask_dir);
  MetricsReport report;
  for (const auto& [stem, gt_path] : gts) {
    auto p = preds.find(stem);
    auto m = masks.find(stem);
    if (p == preds.end() || m == masks.end()) {
      report.warnings.push_back("skipped " + stem + ": missing prediction or mask");
      continue;
    }
    const RgbImage pred = read_rgb(p->second);
    const RgbImage gt = read_rgb(gt_path);
    const ShadowMask mask = read_mask(m->second);
    if (!pred.same_size(gt) || mask.height() != gt.height || mask.width() != gt.width) {
      throw std::runtime_error("size mismatch for " + stem);
    }
    report.per_image.push_back(score_image(stem, pred, gt, mask));
  }
  report.finalize();
  write_report(report, make_run_dir(output_dir, fnv("metrics|" + pred_dir + "|" + gt_dir + "|" + mask_dir)));
  return kExitOk;
}

}  // namespace

fs::path make_run_dir(const fs::path& parent, std::uint64_t hash) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%d-%H%M%S") << '-' << std::hex << std::setw(8) << std::setfill('0')
     << (hash & 0xffffffffULL);
  fs::path dir = parent / os.str();
  for (int i = 2; fs::exists(dir); ++i) dir = parent / (os.str() + "-" + std::to_string(i));
  fs::create_directories(dir);
  return dir;
}

std::vector<AblationVariant> ablation_variants(const std::string& matrix, const TrainConfig& base) {
  std::vector<AblationVariant> out;
  std::stringstream ss(matrix);
  std::string grid;
  while (std::getline(ss, grid, ',')) {
    if (grid == "detach") {
      for (int g = 0; g < 2; ++g) {
        for (int i = 0; i < 2; ++i) {
          TrainConfig c = base;
          c.detach_G_from_I = g != 0;
          c.detach_I_from_R = i != 0;
          out.push_back({std::string("detach_G") + (g ? "x" : "c") + "_I" + (i ? "x" : "c"), c});
        }
      }
    } else if (grid == "tau") {
      for (int tau : {0, 5, 15, 50, 100}) {
        TrainConfig c = base;
        c.tau = tau;
        out.push_back({"tau_" + std::to_string(tau), c});
      }
    } else if (grid == "loss") {
      const std::pair<const char*, double LossWeights::*> terms[] = {
          {"gan", &LossWeights::gan}, {"iden", &LossWeights::iden}, {"rem", &LossWeights::rem},
          {"full", &LossWeights::full}, {"area", &LossWeights::area}};
      for (const auto& [name, member] : terms) {
        TrainConfig c = base;
        c.weights.*member = 0.0;
        out.push_back({std::string("without_") + name, c});
      }
      out.push_back({"all_losses", base});
    } else {
      throw UsageError("unknown ablation grid '" + grid + "'; accepted: detach, tau, loss");
    }
  }
  if (out.empty()) throw UsageError("empty ablation matrix");
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Shadow removal trained from shadow images and masks only"};
  app.require_subcommand(1);

  std::string config, data_root, output_dir = "runs", resume, run_dir;
  std::vector<std::string> sets;
  auto* train_cmd = app.add_subcommand("train", "train all four networks");
  train_cmd->add_option("-c,--config", config, "config file (INI sections) or run manifest JSON");
  train_cmd->add_option("--set", sets, "override, e.g. train.seed=3");
  train_cmd->add_option("--data-root", data_root, "dataset root (overrides data.root)");
  train_cmd->add_option("--output-dir", output_dir, "parent of the run directory (overrides output.dir)");
  train_cmd->add_option("--resume", resume, "checkpoint to resume from");
  train_cmd->add_option("--run-dir", run_dir, "explicit run directory");

  std::string ckpt, image, mask, out;
  int size = 256;
  auto* infer_cmd = app.add_subcommand("infer", "remove the shadow from one image");
  infer_cmd->add_option("--checkpoint", ckpt)->required();
  infer_cmd->add_option("--image", image)->required();
  infer_cmd->add_option("--mask", mask)->required();
  infer_cmd->add_option("--out", out)->required();
  infer_cmd->add_option("--size", size, "working resolution")->check(CLI::PositiveNumber);

  std::string split = "test", mask_source = "gt", masks;
  bool baseline = false;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on an ISTD-style split");
  eval_cmd->add_option("--checkpoint", ckpt);
  eval_cmd->add_option("--data-root", data_root);
  eval_cmd->add_option("--split", split);
  eval_cmd->add_option("--mask-source", mask_source, "gt or provided");
  eval_cmd->add_option("--masks", masks, "mask directory for --mask-source provided");
  eval_cmd->add_option("--output-dir", output_dir);
  eval_cmd->add_option("--size", size)->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--baseline", baseline, "score the unchanged input instead of a model");

  std::string video_root;
  double threshold = 80.0;
  auto* video_cmd = app.add_subcommand("eval-video", "score a checkpoint on per-video frame directories");
  video_cmd->add_option("--checkpoint", ckpt);
  video_cmd->add_option("--video-root", video_root)->required();
  video_cmd->add_option("--threshold", threshold, "moving-shadow luma threshold");
  video_cmd->add_option("--output-dir", output_dir);
  video_cmd->add_option("--size", size)->check(CLI::PositiveNumber);
  video_cmd->add_flag("--baseline", baseline);

  std::string matrix = "detach";
  int workers = 1;
  auto* ablate_cmd = app.add_subcommand("ablate", "train a grid of variants and merge their results");
  ablate_cmd->add_option("-c,--config", config);
  ablate_cmd->add_option("--set", sets);
  ablate_cmd->add_option("--data-root", data_root);
  ablate_cmd->add_option("--output-dir", output_dir);
  ablate_cmd->add_option("--matrix", matrix, "comma-separated grids: detach, tau, loss");
  ablate_cmd->add_option("--workers", workers, "variants trained concurrently");

  std::string pred_dir, gt_dir, mask_dir;
  auto* metrics_cmd = app.add_subcommand("metrics", "score a directory of predictions");
  metrics_cmd->add_option("--pred", pred_dir)->required();
  metrics_cmd->add_option("--gt", gt_dir)->required();
  metrics_cmd->add_option("--mask", mask_dir)->required();
  metrics_cmd->add_option("--output-dir", output_dir);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      // A flag default must not hide output.dir from the config file.
      const std::string out_override = train_cmd->count("--output-dir") ? output_dir : "";
      return cmd_train(config, sets, data_root, out_override, resume, run_dir);
    }
    if (infer_cmd->parsed()) return cmd_infer(ckpt, image, mask, out, size);
    if (eval_cmd->parsed()) {
      if (!baseline && ckpt.empty()) throw UsageError("eval needs --checkpoint or --baseline");
      return cmd_eval(ckpt, data_root, split, mask_source, masks, output_dir, size, baseline);
    }
    if (video_cmd->parsed()) {
      if (!baseline && ckpt.empty()) throw UsageError("eval-video needs --checkpoint or --baseline");
      return cmd_eval_video(ckpt, video_root, threshold, output_dir, size, baseline);
    }
    if (ablate_cmd->parsed()) {
      const std::string out_override = ablate_cmd->count("--output-dir") ? output_dir : "";
      return cmd_ablate(config, sets, data_root, out_override, matrix, workers);
    }
    if (metrics_cmd->parsed()) return cmd_metrics(pred_dir, gt_dir, mask_dir, output_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace g2r
