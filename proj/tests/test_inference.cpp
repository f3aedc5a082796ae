#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

#include "g2r/inference.hpp"
#include "g2r/trainer.hpp"
#include "synthetic.hpp"

using namespace g2r;
namespace fs = std::filesystem;

namespace {

// Returns its input unchanged (first three channels for the refiner).
class IdentityNet final : public Network<float> {
 public:
  explicit IdentityNet(Role role, int in) : Network<float>(role, in) {}
  ag::Var<float> forward(const ag::Var<float>& x) const override {
    return in_channels() == 3 ? x : ag::slice_channels(x, 3);
  }
};

ShadowRemover identity_model(int size) {
  return ShadowRemover(std::make_unique<IdentityNet>(Role::kRemover, 3),
                       std::make_unique<IdentityNet>(Role::kRefiner, 4), size);
}

RgbImage random_rgb(int h, int w, std::mt19937_64& rng) {
  RgbImage img(h, w);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(rng));
  return img;
}

}  // namespace

TEST_CASE("identity stubs with an empty mask reproduce the input exactly") {
  std::mt19937_64 rng(1);
  const RgbImage s = random_rgb(32, 32, rng);
  const ShadowRemover model = identity_model(32);
  const ImageNorm n = rgb_to_norm(s);
  const ImageNorm out = model.run_norm(n, ShadowMask(32, 32));
  CHECK(std::equal(out.values().begin(), out.values().end(), n.values().begin()));
  CHECK(model.run(s, ShadowMask(32, 32)) == s);
  // With identity networks the masked region passes through as well.
  ShadowMask m(32, 32);
  for (int y = 4; y < 20; ++y) m.set(y, 7, true);
  CHECK(model.run(s, m) == s);
}

TEST_CASE("inference is deterministic and works at the configured size") {
  const auto dir = testing::temp_dir("infer");
  TrainConfig cfg;
  cfg.base_channels = 4;
  cfg.residual_blocks = 1;
  Trainer t(cfg);
  save_checkpoint(dir / "m.ckpt", t.to_checkpoint());
  const auto trip = testing::synthetic_triplet(48, 64, 5);
  write_rgb(dir / "s.png", trip.shadow);
  write_mask(dir / "m.png", trip.mask);
  const RgbImage a = remove_shadow(dir / "s.png", dir / "m.png", dir / "m.ckpt", dir / "a.png", 64);
  const RgbImage b = remove_shadow(dir / "s.png", dir / "m.png", dir / "m.ckpt", dir / "b.png", 64);
  CHECK(a.height == 64);
  CHECK(a.width == 64);
  CHECK(a == b);
  CHECK(read_rgb(dir / "a.png") == a);

  Checkpoint partial = load_checkpoint(dir / "m.ckpt");
  REQUIRE(partial.tensors.erase("refiner/tail.conv.bias") == 1);
  CHECK_THROWS_AS(ShadowRemover::from_checkpoint(partial, 64), CheckpointError);
  fs::remove_all(dir);
}

TEST_CASE("evaluate: oracle output scores perfectly, identity equals direct metrics") {
  const auto root = testing::temp_dir("eval");
  testing::write_synthetic_split(root, "test", 4, 40, 40, 9);
  const DatasetIndex idx = load_dataset(root, Split::kTest);

  std::map<std::string, RgbImage> truth;
  for (const auto& r : idx.records) truth[r.stem] = read_rgb(*r.shadow_free);
  std::size_t calls = 0;
  const Predictor oracle = [&](const RgbImage& img, const ShadowMask&) {
    for (const auto& [stem, gt] : truth) {
      if (read_rgb(root / "test_A" / (stem + ".png")) == img) {
        ++calls;
        return gt;
      }
    }
    return img;
  };
  EvaluateOptions opt;
  opt.size = 40;
  const MetricsReport perfect = evaluate(idx, oracle, opt);
  CHECK(calls == 4);
  CHECK(*perfect.mean.rmse_shadow == 0.0);
  CHECK(*perfect.mean.rmse_all == 0.0);
  CHECK(*perfect.mean.ssim_all == doctest::Approx(1.0));

  const MetricsReport base = evaluate(idx, identity_predictor(40), opt);
  for (std::size_t i = 0; i < idx.records.size(); ++i) {
    const auto& r = idx.records[i];
    const RgbImage s = read_rgb(r.image), gt = read_rgb(*r.shadow_free);
    const ShadowMask m = read_mask(r.mask);
    CHECK(*base.per_image[i].rmse_shadow == doctest::Approx(lab_mae_region(rgb_to_lab(s), rgb_to_lab(gt), m)));
    CHECK(*base.per_image[i].rmse_nonshadow == doctest::Approx(0.0));
  }

  fs::remove(root / "test_C" / "002.png");
  const MetricsReport skipped = evaluate(load_dataset(root, Split::kTest), identity_predictor(40), opt);
  CHECK(skipped.per_image.size() == 3);
  REQUIRE(skipped.warnings.size() == 1);
  CHECK(skipped.warnings[0].find("002") != std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("evaluate with provided masks keeps ground-truth regions") {
  const auto root = testing::temp_dir("provided");
  testing::write_synthetic_split(root, "test", 2, 32, 32, 4);
  fs::create_directories(root / "detected");
  write_mask(root / "detected" / "000.png", ShadowMask(32, 32));
  const DatasetIndex idx = load_dataset(root, Split::kTest);
  std::vector<std::size_t> areas;
  const Predictor spy = [&](const RgbImage& img, const ShadowMask& m) {
    areas.push_back(m.area());
    return img;
  };
  EvaluateOptions opt;
  opt.size = 32;
  opt.mask_source = MaskSource::kProvided;
  opt.provided_masks = root / "detected";
  const MetricsReport r = evaluate(idx, spy, opt);
  REQUIRE(areas.size() == 1);
  CHECK(areas[0] == 0);
  CHECK(r.per_image.size() == 1);
  CHECK(r.per_image[0].rmse_shadow.has_value());
  CHECK(r.warnings.size() == 1);
  fs::remove_all(root);
}

TEST_CASE("video evaluation over the moving-shadow mask") {
  const auto root = testing::temp_dir("video");
  std::mt19937_64 rng(3);
  const RgbImage bg = [&] {
    RgbImage img(32, 32);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<std::uint8_t>(150 + (x + y + c * 7) % 80);
      }
    }
    return img;
  }();
  fs::create_directories(root / "moving");
  fs::create_directories(root / "still");
  for (int f = 0; f < 4; ++f) {
    RgbImage frame = bg;
    for (int y = 4; y < 14; ++y) {
      for (int x = 6 * f; x < 6 * f + 8; ++x) {
        for (int c = 0; c < 3; ++c) frame.at(y, x, c) = static_cast<std::uint8_t>(frame.at(y, x, c) / 3);
      }
    }
    write_rgb(root / "moving" / ("f" + std::to_string(f) + ".png"), frame);
    write_rgb(root / "still" / ("f" + std::to_string(f) + ".png"), bg);
  }
  VideoOptions opt;
  opt.size = 32;
  const MetricsReport r = evaluate_video(root, identity_predictor(32), opt);
  CHECK(r.per_image.size() == 4);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("still") != std::string::npos);

  std::vector<RgbImage> frames;
  for (int f = 0; f < 4; ++f) frames.push_back(read_rgb(root / "moving" / ("f" + std::to_string(f) + ".png")));
  const RgbImage ref = vmax(frames);
  const MovingShadow ms = moving_shadow_mask(frames, ref, 80);
  for (int f = 0; f < 4; ++f) {
    CHECK(*r.per_image[f].rmse_shadow ==
          doctest::Approx(lab_mae_region(rgb_to_lab(frames[f]), rgb_to_lab(ref), ms.moving)));
    CHECK(r.per_image[f].rmse_dagger.has_value());
  }
  fs::remove_all(root);
}
