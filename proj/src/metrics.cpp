#include "g2r/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace g2r {
namespace {

void check_region_inputs(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask,
                         const char* what) {
  if (pred.height() != gt.height() || pred.width() != gt.width() ||
      mask.height() != pred.height() || mask.width() != pred.width()) {
    throw std::invalid_argument(std::string(what) + ": image/mask dimensions differ");
  }
  if (mask.empty_region()) throw RegionUndefinedError(std::string(what) + ": empty mask region");
}

void check_same_size(const RgbImage& a, const RgbImage& b, const char* what) {
  if (!a.same_size(b)) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(a.height) + "x" +
                                std::to_string(a.width) + " vs " + std::to_string(b.height) +
                                "x" + std::to_string(b.width));
  }
}

// Sum over masked pixels of (per-pixel, channel-averaged) |pred - gt|.
double masked_abs_sum(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask) {
  const std::size_t n = mask.size();
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    const float* p = pred.tensor().plane(c);
    const float* g = gt.tensor().plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) sum += std::abs(static_cast<double>(p[i]) - static_cast<double>(g[i]));
    }
  }
  return sum / 3.0;
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  double total = 0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= total;
  return w;
}

// 'valid' separable filtering of a single plane.
std::vector<double> filter_valid(const std::vector<double>& in, int height, int width,
                                 const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int ho = height - k + 1;
  const int wo = width - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(height) * wo);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < wo; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += w[static_cast<std::size_t>(i)] * in[static_cast<std::size_t>(y) * width + x + i];
      tmp[static_cast<std::size_t>(y) * wo + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ho) * wo);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += w[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * wo + x];
      out[static_cast<std::size_t>(y) * wo + x] = s;
    }
  }
  return out;
}

double ssim_channel(const RgbImage& a, const RgbImage& b, int c, const SsimParams& p) {
  const std::size_t n = a.pixel_count();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.pixels[3 * i + static_cast<std::size_t>(c)];
    y[i] = b.pixels[3 * i + static_cast<std::size_t>(c)];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto w = gaussian_window(p.window, p.sigma);
  const auto mx = filter_valid(x, a.height, a.width, w);
  const auto my = filter_valid(y, a.height, a.width, w);
  const auto sxx = filter_valid(xx, a.height, a.width, w);
  const auto syy = filter_valid(yy, a.height, a.width, w);
  const auto sxy = filter_valid(xy, a.height, a.width, w);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double total = 0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json record_json(const ImageMetrics& m) {
  return {{"image", m.name},
          {"rmse_shadow", optional_json(m.rmse_shadow)},
          {"rmse_nonshadow", optional_json(m.rmse_nonshadow)},
          {"rmse_all", optional_json(m.rmse_all)},
          {"psnr_shadow", optional_json(m.psnr_shadow)},
          {"psnr_nonshadow", optional_json(m.psnr_nonshadow)},
          {"psnr_all", optional_json(m.psnr_all)},
          {"ssim_shadow", optional_json(m.ssim_shadow)},
          {"ssim_nonshadow", optional_json(m.ssim_nonshadow)},
          {"ssim_all", optional_json(m.ssim_all)},
          {"rmse_dagger", optional_json(m.rmse_dagger)}};
}

std::string csv_field(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(10) << *v;
  return os.str();
}

}  // namespace

double lab_mae_region(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask) {
  check_region_inputs(pred, gt, mask, "lab_mae_region");
  return masked_abs_sum(pred, gt, mask) / static_cast<double>(mask.area());
}

double true_rmse_region(const ImageLab& pred, const ImageLab& gt, const ShadowMask& mask) {
  check_region_inputs(pred, gt, mask, "true_rmse_region");
  const std::size_t n = mask.size();
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    const float* p = pred.tensor().plane(c);
    const float* g = gt.tensor().plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      const double d = static_cast<double>(p[i]) - static_cast<double>(g[i]);
      sum += d * d;
    }
  }
  return std::sqrt(sum / (3.0 * static_cast<double>(mask.area())));
}

double psnr(const RgbImage& pred, const RgbImage& gt) {
  check_same_size(pred, gt, "psnr");
  double sum = 0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const double d = static_cast<double>(pred.pixels[i]) - gt.pixels[i];
    sum += d * d;
  }
  if (sum == 0.0) return kPsnrCapDb;
  const double mse = sum / static_cast<double>(pred.pixels.size());
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const RgbImage& pred, const RgbImage& gt, const SsimParams& params) {
  check_same_size(pred, gt, "ssim");
  if (pred.height < params.window || pred.width < params.window) {
    throw std::invalid_argument("ssim: image smaller than the " + std::to_string(params.window) +
                                "x" + std::to_string(params.window) + " window");
  }
  double total = 0;
  for (int c = 0; c < 3; ++c) total += ssim_channel(pred, gt, c, params);
  return total / 3.0;
}

RgbImage mask_rgb(const RgbImage& img, const ShadowMask& mask) {
  if (img.height != mask.height() || img.width != mask.width()) {
    throw std::invalid_argument("mask_rgb: image/mask dimensions differ");
  }
  RgbImage out = img;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = 0;
  }
  return out;
}

double psnr_region(const RgbImage& pred, const RgbImage& gt, const ShadowMask& mask) {
  if (mask.empty_region()) throw RegionUndefinedError("psnr_region: empty mask region");
  return psnr(mask_rgb(pred, mask), mask_rgb(gt, mask));
}

double ssim_region(const RgbImage& pred, const RgbImage& gt, const ShadowMask& mask) {
  if (mask.empty_region()) throw RegionUndefinedError("ssim_region: empty mask region");
  return ssim(mask_rgb(pred, mask), mask_rgb(gt, mask));
}

RgbImage vmax(std::span<const RgbImage> frames) {
  if (frames.empty()) throw std::invalid_argument("vmax: empty frame sequence");
  RgbImage out = frames.front();
  for (const RgbImage& f : frames.subspan(1)) {
    check_same_size(out, f, "vmax");
    const std::size_t n = out.pixels.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) out.pixels[i] = std::max(out.pixels[i], f.pixels[i]);
  }
  return out;
}

std::vector<double> luma(const RgbImage& img) {
  std::vector<double> out(img.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.299 * img.pixels[3 * i] + 0.587 * img.pixels[3 * i + 1] + 0.114 * img.pixels[3 * i + 2];
  }
  return out;
}

MovingShadow moving_shadow_mask(std::span<const RgbImage> frames, const RgbImage& vmax_img,
                                double threshold) {
  if (!(threshold > 0.0 && threshold < 255.0)) {
    throw std::invalid_argument("moving_shadow_mask: threshold must lie in (0,255)");
  }
  MovingShadow result;
  const auto ref = luma(vmax_img);
  ShadowMask ever_shadow(vmax_img.height, vmax_img.width);
  ShadowMask ever_lit(vmax_img.height, vmax_img.width);
  for (const RgbImage& f : frames) {
    check_same_size(vmax_img, f, "moving_shadow_mask");
    const auto y = luma(f);
    ShadowMask m(f.height, f.width);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool shadow = ref[i] - y[i] > threshold;
      m.set(i, shadow);
      if (shadow) {
        ever_shadow.set(i, true);
      } else {
        ever_lit.set(i, true);
      }
    }
    result.per_frame.push_back(std::move(m));
  }
  result.moving = ever_shadow.intersect(ever_lit);
  return result;
}

ImageMetrics score_image(const std::string& name, const RgbImage& pred, const RgbImage& gt,
                         const ShadowMask& shadow) {
  check_same_size(pred, gt, "score_image");
  ImageMetrics m;
  m.name = name;
  const ImageLab lp = rgb_to_lab(pred);
  const ImageLab lg = rgb_to_lab(gt);
  const ShadowMask lit = shadow.complement();
  const ShadowMask all(pred.height, pred.width, true);
  if (!shadow.empty_region()) {
    m.shadow_abs_sum = masked_abs_sum(lp, lg, shadow);
    m.shadow_pixels = shadow.area();
    m.rmse_shadow = m.shadow_abs_sum / static_cast<double>(m.shadow_pixels);
    m.psnr_shadow = psnr_region(pred, gt, shadow);
    m.ssim_shadow = ssim_region(pred, gt, shadow);
  }
  if (!lit.empty_region()) {
    m.rmse_nonshadow = lab_mae_region(lp, lg, lit);
    m.psnr_nonshadow = psnr_region(pred, gt, lit);
    m.ssim_nonshadow = ssim_region(pred, gt, lit);
  }
  m.rmse_all = lab_mae_region(lp, lg, all);
  m.psnr_all = psnr(pred, gt);
  m.ssim_all = ssim(pred, gt);
  return m;
}

void MetricsReport::finalize() {
  ImageMetrics agg;
  agg.name = "mean";
  auto average = [this](std::optional<double> ImageMetrics::*field) -> std::optional<double> {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& r : per_image) {
      if (r.*field) {
        sum += *(r.*field);
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };
  for (auto field : {&ImageMetrics::rmse_shadow, &ImageMetrics::rmse_nonshadow,
                     &ImageMetrics::rmse_all, &ImageMetrics::psnr_shadow,
                     &ImageMetrics::psnr_nonshadow, &ImageMetrics::psnr_all,
                     &ImageMetrics::ssim_shadow, &ImageMetrics::ssim_nonshadow,
                     &ImageMetrics::ssim_all, &ImageMetrics::rmse_dagger}) {
    agg.*field = average(field);
  }
  double abs_sum = 0;
  std::size_t pixels = 0;
  for (const auto& r : per_image) {
    abs_sum += r.shadow_abs_sum;
    pixels += r.shadow_pixels;
  }
  agg.shadow_abs_sum = abs_sum;
  agg.shadow_pixels = pixels;
  pixel_averaged_rmse = pixels ? std::optional<double>(abs_sum / static_cast<double>(pixels))
                               : std::nullopt;
  mean = std::move(agg);
}

void MetricsReport::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "image,rmse_shadow,rmse_nonshadow,rmse_all,psnr_shadow,psnr_nonshadow,psnr_all,"
         "ssim_shadow,ssim_nonshadow,ssim_all,rmse_dagger,pixel_averaged_rmse\n";
  auto row = [&out](const ImageMetrics& m, const std::optional<double>& pixel_avg) {
    out << m.name << ',' << csv_field(m.rmse_shadow) << ',' << csv_field(m.rmse_nonshadow) << ','
        << csv_field(m.rmse_all) << ',' << csv_field(m.psnr_shadow) << ','
        << csv_field(m.psnr_nonshadow) << ',' << csv_field(m.psnr_all) << ','
        << csv_field(m.ssim_shadow) << ',' << csv_field(m.ssim_nonshadow) << ','
        << csv_field(m.ssim_all) << ',' << csv_field(m.rmse_dagger) << ','
        << csv_field(pixel_avg) << '\n';
  };
  for (const auto& r : per_image) {
    row(r, r.shadow_pixels ? std::optional<double>(r.shadow_abs_sum / static_cast<double>(r.shadow_pixels))
                           : std::nullopt);
  }
  row(mean, pixel_averaged_rmse);
}

std::string MetricsReport::to_json_string() const {
  nlohmann::json j;
  j["per_image"] = nlohmann::json::array();
  for (const auto& r : per_image) j["per_image"].push_back(record_json(r));
  j["mean"] = record_json(mean);
  j["pixel_averaged_rmse"] = optional_json(pixel_averaged_rmse);
  j["warnings"] = warnings;
  return j.dump(2);
}

void MetricsReport::write_json(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string() << '\n';
}

}  // namespace g2r
