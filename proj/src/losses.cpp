#include "g2r/losses.hpp"

#include <array>
#include <cmath>

#include "g2r/data.hpp"

namespace g2r {

void LossWeights::validate() const {
  const std::array<std::pair<const char*, double>, 5> all{
      {{"gan", gan}, {"iden", iden}, {"rem", rem}, {"full", full}, {"area", area}}};
  for (const auto& [name, w] : all) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument(std::string("loss weight ") + name +
                                  " must be finite and non-negative");
    }
  }
}

TrainingDivergenceError::TrainingDivergenceError(const std::string& term, double value)
    : std::runtime_error("training diverged: loss term '" + term + "' is " +
                         std::to_string(value)),
      term_(term) {}

LossBreakdown total_loss(const LossComponents& parts, const LossWeights& weights) {
  const std::array<std::pair<const char*, double>, 6> all{{{"gan", parts.gan},
                                                           {"iden", parts.iden},
                                                           {"rem", parts.rem},
                                                           {"full", parts.full},
                                                           {"area", parts.area},
                                                           {"dis", parts.dis}}};
  for (const auto& [name, v] : all) {
    if (!std::isfinite(v)) throw TrainingDivergenceError(name, v);
  }
  LossBreakdown b;
  b.gan = parts.gan;
  b.iden = parts.iden;
  b.rem = parts.rem;
  b.full = parts.full;
  b.area = parts.area;
  b.dis = parts.dis;
  b.total = weights.gan * parts.gan + weights.iden * parts.iden + weights.rem * parts.rem +
            weights.full * parts.full + weights.area * parts.area;
  if (!std::isfinite(b.total)) throw TrainingDivergenceError("total", b.total);
  return b;
}

template <typename T>
ag::Var<T> loss_gen(const ag::Var<T>& score_fake) {
  return ag::half_mse_to(score_fake, 1.0);
}

template <typename T>
ag::Var<T> loss_dis(const ag::Var<T>& score_fake, const ag::Var<T>& score_real) {
  const std::array<ag::Var<T>, 2> terms{ag::half_mse_to(score_fake, 0.0),
                                        ag::half_mse_to(score_real, 1.0)};
  const std::array<double, 2> w{1.0, 1.0};
  return ag::weighted_sum<T>(terms, w);
}

template <typename T>
ag::Var<T> loss_identity(const ag::Var<T>& generated_from_shadow, const ag::Var<T>& shadow_region) {
  return ag::l1(generated_from_shadow, shadow_region);
}

template <typename T>
ag::Var<T> loss_removal(const ag::Var<T>& removed, const ag::Var<T>& nonshadow_region) {
  return ag::l1(removed, nonshadow_region);
}

template <typename T>
ag::Var<T> loss_full(const ag::Var<T>& refined, const ag::Var<T>& image) {
  return ag::l1(refined, image);
}

template <typename T>
ag::Var<T> loss_area_weighted(const ag::Var<T>& refined, const ag::Var<T>& image,
                              const Tensor<T>& dilated_mask) {
  return ag::weighted_l1(refined, image, dilated_mask);
}

template <typename T>
ag::Var<T> loss_area(const ag::Var<T>& refined, const ag::Var<T>& image, const ShadowMask& mask,
                     int tau) {
  return loss_area_weighted(refined, image, dilate_mask(mask, tau).to_tensor<T>());
}

namespace {
ag::Var<double> constant(const Tensor<double>& t) { return ag::Var<double>::constant(t); }
}  // namespace

double loss_gen(const Tensor<double>& score_fake) { return loss_gen(constant(score_fake)).item(); }
double loss_dis(const Tensor<double>& score_fake, const Tensor<double>& score_real) {
  return loss_dis(constant(score_fake), constant(score_real)).item();
}
double loss_identity(const Tensor<double>& a, const Tensor<double>& b) {
  return loss_identity(constant(a), constant(b)).item();
}
double loss_removal(const Tensor<double>& a, const Tensor<double>& b) {
  return loss_removal(constant(a), constant(b)).item();
}
double loss_full(const Tensor<double>& a, const Tensor<double>& b) {
  return loss_full(constant(a), constant(b)).item();
}
double loss_area(const Tensor<double>& refined, const Tensor<double>& image,
                 const ShadowMask& mask, int tau) {
  return loss_area(constant(refined), constant(image), mask, tau).item();
}

#define G2R_INSTANTIATE(T)                                                                   \
  template ag::Var<T> loss_gen(const ag::Var<T>&);                                            \
  template ag::Var<T> loss_dis(const ag::Var<T>&, const ag::Var<T>&);                         \
  template ag::Var<T> loss_identity(const ag::Var<T>&, const ag::Var<T>&);                    \
  template ag::Var<T> loss_removal(const ag::Var<T>&, const ag::Var<T>&);                     \
  template ag::Var<T> loss_full(const ag::Var<T>&, const ag::Var<T>&);                        \
  template ag::Var<T> loss_area(const ag::Var<T>&, const ag::Var<T>&, const ShadowMask&, int); \
  template ag::Var<T> loss_area_weighted(const ag::Var<T>&, const ag::Var<T>&, const Tensor<T>&);

G2R_INSTANTIATE(float)
G2R_INSTANTIATE(double)
#undef G2R_INSTANTIATE

}  // namespace g2r
