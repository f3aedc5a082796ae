#pragma once

#include <stdexcept>
#include <string>

#include "g2r/autograd.hpp"
#include "g2r/image.hpp"

namespace g2r {

/// Weights of the adversarial, identity, removal, full-image and
/// dilated-area terms of the generator-side objective.
struct LossWeights {
  double gan = 1.0;
  double iden = 5.0;
  double rem = 1.0;
  double full = 1.0;
  double area = 1.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

struct LossComponents {
  double gan = 0, iden = 0, rem = 0, full = 0, area = 0;
  double dis = 0;
};

struct LossBreakdown {
  double gan = 0, iden = 0, rem = 0, full = 0, area = 0;
  double total = 0;  // weighted generator-side sum; excludes dis
  double dis = 0;
};

class TrainingDivergenceError : public std::runtime_error {
 public:
  TrainingDivergenceError(const std::string& term, double value);
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

/// Weighted sum of the generator-side terms. Throws TrainingDivergenceError
/// naming the first non-finite component.
LossBreakdown total_loss(const LossComponents& parts, const LossWeights& weights);

// Least-squares adversarial terms.
template <typename T>
ag::Var<T> loss_gen(const ag::Var<T>& score_fake);
template <typename T>
ag::Var<T> loss_dis(const ag::Var<T>& score_fake, const ag::Var<T>& score_real);

// L1 terms, averaged over every pixel and channel of the full frame.
template <typename T>
ag::Var<T> loss_identity(const ag::Var<T>& generated_from_shadow, const ag::Var<T>& shadow_region);
template <typename T>
ag::Var<T> loss_removal(const ag::Var<T>& removed, const ag::Var<T>& nonshadow_region);
template <typename T>
ag::Var<T> loss_full(const ag::Var<T>& refined, const ag::Var<T>& image);

/// (1/n) sum_p dilate(M, tau)_p * mean_c |refined - image|.
template <typename T>
ag::Var<T> loss_area(const ag::Var<T>& refined, const ag::Var<T>& image, const ShadowMask& mask,
                     int tau);
template <typename T>
ag::Var<T> loss_area_weighted(const ag::Var<T>& refined, const ag::Var<T>& image,
                              const Tensor<T>& dilated_mask);

// Value-only conveniences.
double loss_gen(const Tensor<double>& score_fake);
double loss_dis(const Tensor<double>& score_fake, const Tensor<double>& score_real);
double loss_identity(const Tensor<double>& a, const Tensor<double>& b);
double loss_removal(const Tensor<double>& a, const Tensor<double>& b);
double loss_full(const Tensor<double>& a, const Tensor<double>& b);
double loss_area(const Tensor<double>& refined, const Tensor<double>& image,
                 const ShadowMask& mask, int tau);

}  // namespace g2r
