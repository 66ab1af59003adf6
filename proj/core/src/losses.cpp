#include "warpalign/losses.hpp"

#include <algorithm>
#include <cmath>

#include "warpalign/errors.hpp"

namespace warpalign {
namespace {

constexpr double kPenaltyOffset = 0.1;

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw ContractViolation("loss inputs must be non-empty and of equal length");
  }
}

struct Moments {
  double dot = 0.0;
  double xx = 0.0;
  double yy = 0.0;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.dot += x[i] * y[i];
    m.xx += x[i] * x[i];
    m.yy += y[i] * y[i];
  }
  return m;
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void require_same_shape(const Series& x, const Series& y) {
  if (x.dims() != y.dims() || x.length() != y.length()) {
    throw ContractViolation("series shapes differ: (" + std::to_string(x.dims()) + "x" +
                            std::to_string(x.length()) + ") vs (" + std::to_string(y.dims()) +
                            "x" + std::to_string(y.length()) + ")");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("lambda1/lambda2 must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

double cosine_similarity(std::span<const double> x, std::span<const double> y, double epsilon) {
  require_same_length(x, y);
  const auto m = moments(x, y);
  // One square root of the product keeps exact cases exact (|s| = 1 for parallel
  // integer vectors).
  return m.dot / std::max(std::sqrt(m.xx * m.yy), epsilon);
}

double signed_square_loss(std::span<const double> x, std::span<const double> y, double epsilon) {
  const double s = cosine_similarity(x, y, epsilon);
  return 1.0 - s * s * sign(s);
}

double signed_square_loss_grad(std::span<const double> x, std::span<const double> y,
                               double epsilon, std::span<double> grad_x) {
  require_same_length(x, y);
  if (grad_x.size() != x.size()) throw ContractViolation("gradient buffer has wrong size");
  const auto m = moments(x, y);
  const double denom = std::sqrt(m.xx * m.yy);
  const bool clipped = denom <= epsilon;
  const double s = m.dot / (clipped ? epsilon : denom);
  // L = 1 - s|s|, dL/ds = -2|s|
  const double dl_ds = -2.0 * std::abs(s);
  if (clipped) {
    for (std::size_t i = 0; i < x.size(); ++i) grad_x[i] = dl_ds * y[i] / epsilon;
  } else {
    const double a = 1.0 / denom;
    const double b = s / m.xx;
    for (std::size_t i = 0; i < x.size(); ++i) grad_x[i] = dl_ds * (a * y[i] - b * x[i]);
  }
  return 1.0 - s * s * sign(s);
}

double series_loss(const Series& x, const Series& y, double epsilon) {
  require_same_shape(x, y);
  double total = 0.0;
  for (std::size_t r = 0; r < x.dims(); ++r) total += signed_square_loss(x.row(r), y.row(r), epsilon);
  return total / static_cast<double>(x.dims());
}

double main_loss(const Series& x, const Series& y, const SoftWarpMatrix& w, double epsilon) {
  if (x.dims() != y.dims()) throw ContractViolation("main_loss: dimension mismatch");
  if (w.rows() != y.length()) throw ContractViolation("main_loss: warp length differs from target");
  return series_loss(apply_warp(w, x), y, epsilon);
}

double penalization(std::span<const double> slopes, double lambda1) {
  if (slopes.empty()) throw ContractViolation("penalization: no slopes");
  double dev = 0.0;
  double sq = 0.0;
  for (double a : slopes) {
    dev += (a - 1.0) * (a - 1.0);
    sq += a * a;
  }
  const double mean_sq = sq / static_cast<double>(slopes.size());
  return dev + lambda1 / (mean_sq + kPenaltyOffset);
}

std::vector<double> penalization_grad(std::span<const double> slopes, double lambda1) {
  if (slopes.empty()) throw ContractViolation("penalization: no slopes");
  const double K = static_cast<double>(slopes.size());
  double sq = 0.0;
  for (double a : slopes) sq += a * a;
  const double d = sq / K + kPenaltyOffset;
  std::vector<double> g(slopes.size());
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    g[k] = 2.0 * (slopes[k] - 1.0) - lambda1 * (2.0 * slopes[k] / K) / (d * d);
  }
  return g;
}

double final_loss(const Series& x, const Series& y, const SoftWarpMatrix& w,
                  std::span<const double> slopes, const LossConfig& cfg) {
  return main_loss(x, y, w, cfg.epsilon) + cfg.lambda2 * penalization(slopes, cfg.lambda1);
}

double mean_pairwise_loss(std::span<const Series> members, double epsilon) {
  if (members.size() < 2) throw ContractViolation("mean_pairwise_loss needs at least 2 series");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      total += series_loss(members[i], members[j], epsilon);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double mean_pairwise_loss(const ClassGroup& group, double epsilon) {
  return mean_pairwise_loss(group.series, epsilon);
}

double grouped_alignment_loss(std::span<const ClassGroup> groups, double epsilon) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    total += static_cast<double>(g.size()) * mean_pairwise_loss(g, epsilon);
    count += g.size();
  }
  if (count == 0) throw ContractViolation("grouped_alignment_loss: no class has 2 members");
  return total / static_cast<double>(count);
}

}  // namespace warpalign
