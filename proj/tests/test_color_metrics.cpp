#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "g2r/color.hpp"
#include "g2r/metrics.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace g2r;

namespace {

RgbImage random_rgb(int h, int w, std::mt19937_64& rng) {
  RgbImage img(h, w);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(rng));
  return img;
}

ShadowMask random_mask(int h, int w, std::mt19937_64& rng, double p = 0.4) {
  ShadowMask m(h, w);
  std::bernoulli_distribution on(p);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, on(rng));
  if (m.empty_region()) m.set(0, true);
  return m;
}

ImageLab random_lab(int h, int w, std::mt19937_64& rng) {
  ImageLab lab(h, w);
  std::uniform_real_distribution<double> L(0, 100), ab(-100, 100);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) lab.at(c, y, x) = static_cast<float>(c == 0 ? L(rng) : ab(rng));
    }
  }
  return lab;
}

std::vector<oracle::Plane> planes(const ImageLab& lab) {
  std::vector<oracle::Plane> out(3);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < lab.height(); ++y) {
      for (int x = 0; x < lab.width(); ++x) out[c].push_back(lab.at(c, y, x));
    }
  }
  return out;
}

std::vector<int> bits(const ShadowMask& m) {
  std::vector<int> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i];
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

}  // namespace

TEST_CASE("LAB conversion matches the textbook formula") {
  std::mt19937_64 rng(1);
  const RgbImage img = random_rgb(16, 16, rng);
  const ImageLab lab = rgb_to_lab(img);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const auto want = oracle::lab(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
      for (int c = 0; c < 3; ++c) CHECK(lab.at(c, y, x) == doctest::Approx(want[c]).epsilon(1e-5).scale(100));
    }
  }
}

TEST_CASE("white and black map to the LAB extremes") {
  const auto white = srgb_to_lab(255, 255, 255);
  CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(std::abs(white[1]) < 1e-9);
  CHECK(std::abs(white[2]) < 1e-9);
  const auto black = srgb_to_lab(0, 0, 0);
  CHECK(std::abs(black[0]) < 1e-9);
}

TEST_CASE("8-bit RGB survives the LAB round trip") {
  std::mt19937_64 rng(2);
  const RgbImage img = random_rgb(32, 32, rng);
  CHECK(lab_to_rgb(rgb_to_lab(img)) == img);
  CHECK(lab_to_rgb(denormalize(normalize(rgb_to_lab(img)))) == img);
}

TEST_CASE("normalized LAB stays inside [-1,1]") {
  std::mt19937_64 rng(3);
  const ImageNorm n = normalize(rgb_to_lab(random_rgb(16, 16, rng)));
  for (float v : n.values()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  RgbImage white(2, 2, 255);
  const ImageNorm w = normalize(rgb_to_lab(white));
  CHECK(w.at(0, 0, 0) == doctest::Approx(1.0f));
}

TEST_CASE("region metrics agree with brute-force oracles on random inputs") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const ImageLab p = random_lab(16, 16, rng), g = random_lab(16, 16, rng);
    const ShadowMask m = random_mask(16, 16, rng);
    CHECK(rel(lab_mae_region(p, g, m), oracle::lab_mae(planes(p), planes(g), bits(m))) < 1e-9);
    CHECK(rel(true_rmse_region(p, g, m), oracle::true_rmse(planes(p), planes(g), bits(m))) < 1e-9);

    const RgbImage a = random_rgb(16, 16, rng), b = random_rgb(16, 16, rng);
    CHECK(rel(psnr(a, b), oracle::psnr(a.pixels, b.pixels)) < 1e-9);
    CHECK(rel(ssim(a, b), oracle::ssim(a.pixels, b.pixels, 16, 16)) < 1e-9);
  }
}

TEST_CASE("PSNR and SSIM fixed points") {
  std::mt19937_64 rng(5);
  const RgbImage a = random_rgb(24, 24, rng);
  CHECK(psnr(a, a) == kPsnrCapDb);
  CHECK(ssim(a, a) == doctest::Approx(1.0));
  RgbImage b = a;
  for (auto& p : b.pixels) p = static_cast<std::uint8_t>(p ^ 1);
  CHECK(psnr(a, b) == doctest::Approx(10 * std::log10(255.0 * 255.0)));
  CHECK(lab_mae_region(rgb_to_lab(a), rgb_to_lab(a), ShadowMask(24, 24, true)) == 0.0);
}

TEST_CASE("region metrics reject empty masks and size mismatches") {
  std::mt19937_64 rng(6);
  const ImageLab p = random_lab(8, 8, rng);
  CHECK_THROWS_AS(lab_mae_region(p, p, ShadowMask(8, 8)), RegionUndefinedError);
  CHECK_THROWS_AS(true_rmse_region(p, p, ShadowMask(8, 8)), RegionUndefinedError);
  CHECK_THROWS_AS(lab_mae_region(p, random_lab(8, 9, rng), ShadowMask(8, 8, true)), std::invalid_argument);
  const RgbImage a = random_rgb(8, 8, rng);
  CHECK_THROWS_AS(ssim(a, a), std::invalid_argument);
  CHECK_THROWS_AS(psnr_region(a, a, ShadowMask(8, 8)), RegionUndefinedError);
}

TEST_CASE("region PSNR zeroes outside the mask") {
  std::mt19937_64 rng(7);
  const RgbImage a = random_rgb(16, 16, rng), b = random_rgb(16, 16, rng);
  const ShadowMask m = random_mask(16, 16, rng);
  CHECK(psnr_region(a, b, m) == doctest::Approx(psnr(mask_rgb(a, m), mask_rgb(b, m))));
  CHECK(ssim_region(a, b, m) == doctest::Approx(ssim(mask_rgb(a, m), mask_rgb(b, m))));
}

TEST_CASE("vmax matches the oracle and rejects empty input") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RgbImage> frames;
    std::vector<std::vector<std::uint8_t>> raw;
    for (int f = 0; f < 4; ++f) {
      frames.push_back(random_rgb(16, 16, rng));
      raw.push_back(frames.back().pixels);
    }
    CHECK(vmax(frames).pixels == oracle::vmax(raw));
  }
  CHECK_THROWS(vmax(std::vector<RgbImage>{}));
}

TEST_CASE("moving-shadow mask covers pixels shadowed in some frames only") {
  RgbImage lit(4, 4, 200);
  RgbImage half = lit;
  for (int x = 0; x < 4; ++x) {
    for (int c = 0; c < 3; ++c) half.at(0, x, c) = 50;
  }
  RgbImage always = lit;
  for (int c = 0; c < 3; ++c) always.at(3, 3, c) = 10;
  // (3,3) is dark in both frames of the second video, so it is not moving.
  std::vector<RgbImage> frames{lit, half};
  const MovingShadow ms = moving_shadow_mask(frames, vmax(frames), 80);
  CHECK(ms.moving.area() == 4);
  CHECK(ms.per_frame[1].area() == 4);
  CHECK(ms.per_frame[0].area() == 0);
  std::vector<RgbImage> still{always, always};
  CHECK(moving_shadow_mask(still, vmax(still), 80).moving.area() == 0);
  CHECK_THROWS(moving_shadow_mask(frames, vmax(frames), 0));
}

TEST_CASE("luma uses BT.601 weights") {
  RgbImage img(1, 1);
  img.at(0, 0, 0) = 100;
  img.at(0, 0, 1) = 50;
  img.at(0, 0, 2) = 200;
  CHECK(luma(img)[0] == doctest::Approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200));
}

TEST_CASE("metrics report aggregates and serializes") {
  std::mt19937_64 rng(9);
  MetricsReport report;
  for (int i = 0; i < 3; ++i) {
    const RgbImage a = random_rgb(16, 16, rng), b = random_rgb(16, 16, rng);
    report.per_image.push_back(score_image("img" + std::to_string(i), a, b, random_mask(16, 16, rng)));
  }
  report.finalize();
  double mean = 0, abs_sum = 0;
  std::size_t pixels = 0;
  for (const auto& r : report.per_image) {
    mean += *r.rmse_shadow / 3;
    abs_sum += r.shadow_abs_sum;
    pixels += r.shadow_pixels;
  }
  CHECK(*report.mean.rmse_shadow == doctest::Approx(mean));
  CHECK(*report.pixel_averaged_rmse == doctest::Approx(abs_sum / pixels));

  const auto dir = testing::temp_dir("report");
  report.write_csv(dir / "m.csv");
  report.write_json(dir / "m.json");
  std::ifstream csv(dir / "m.csv");
  std::string header, line;
  std::getline(csv, header);
  CHECK(header.find("rmse_shadow") != std::string::npos);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
  std::ifstream js(dir / "m.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.at("per_image").size() == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("score_image of a perfect prediction") {
  std::mt19937_64 rng(10);
  const RgbImage a = random_rgb(16, 16, rng);
  const ImageMetrics m = score_image("x", a, a, random_mask(16, 16, rng, 0.3));
  CHECK(*m.rmse_shadow == 0.0);
  CHECK(*m.rmse_all == 0.0);
  CHECK(*m.psnr_all == kPsnrCapDb);
  CHECK(*m.ssim_shadow == doctest::Approx(1.0));
}
