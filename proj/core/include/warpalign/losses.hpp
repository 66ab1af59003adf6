#pragma once

#include <span>
#include <vector>

#include "warpalign/dataset.hpp"
#include "warpalign/series.hpp"
#include "warpalign/warp.hpp"

namespace warpalign {

struct LossConfig {
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double epsilon = 1e-8;

  void validate() const;
};

double cosine_similarity(std::span<const double> x, std::span<const double> y,
                         double epsilon = 1e-8);

/// 1 - S^2 sign(S) with S the cosine similarity; 0 for codirectional inputs,
/// 1 for orthogonal, 2 for contradirectional.
double signed_square_loss(std::span<const double> x, std::span<const double> y,
                          double epsilon = 1e-8);

/// Row-averaged signed-square loss between two equally shaped series.
double series_loss(const Series& x, const Series& y, double epsilon = 1e-8);

/// Loss value plus its gradient with respect to `x` (written to `grad_x`, same length).
double signed_square_loss_grad(std::span<const double> x, std::span<const double> y,
                               double epsilon, std::span<double> grad_x);

/// Main alignment loss: `x` is warped by `w`, then compared with `y` row by row.
double main_loss(const Series& x, const Series& y, const SoftWarpMatrix& w,
                 double epsilon = 1e-8);

double penalization(std::span<const double> slopes, double lambda1);
std::vector<double> penalization_grad(std::span<const double> slopes, double lambda1);

double final_loss(const Series& x, const Series& y, const SoftWarpMatrix& w,
                  std::span<const double> slopes, const LossConfig& cfg);

/// Mean signed-square loss over all unordered pairs of the group (no warping).
double mean_pairwise_loss(std::span<const Series> members, double epsilon = 1e-8);
double mean_pairwise_loss(const ClassGroup& group, double epsilon = 1e-8);

/// Dataset-level alignment score: every signal's mean loss to the other
/// members of its class, averaged over all signals. Equals the class-size
/// weighted mean of the per-class mean_pairwise_loss. Singleton classes are skipped.
double grouped_alignment_loss(std::span<const ClassGroup> groups, double epsilon = 1e-8);

}  // namespace warpalign
