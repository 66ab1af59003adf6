#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "warpalign/series.hpp"

namespace warpalign {

/// Piecewise-linear warping function with K segments: slope `slopes[k]` over a
/// window of `durations[k]` output steps. `length` is the warped length T.
struct PiecewiseLinearWarp {
  std::vector<double> slopes;
  std::vector<double> durations;
  std::size_t length = 0;

  std::size_t segments() const noexcept { return slopes.size(); }

  static PiecewiseLinearWarp identity(std::size_t segments, std::size_t length);
};

struct ConstraintReport {
  bool boundary = false;
  bool monotonicity = false;
  bool continuity = false;

  bool ok() const noexcept { return boundary && monotonicity && continuity; }
};

/// Rescale raw durations so they sum to `length`; uniform when the raw sum is
/// below 1e-8.
std::vector<double> normalize_durations(std::span<const double> raw, std::size_t length);

/// Vector-Jacobian product of normalize_durations.
std::vector<double> normalize_durations_backward(std::span<const double> raw, std::size_t length,
                                                 std::span<const double> upstream);

double eval_tau(const PiecewiseLinearWarp& warp, double t);

ConstraintReport check_constraints(const PiecewiseLinearWarp& warp);

/// Row-stochastic interpolation matrix with at most two adjacent nonzeros per
/// row, stored compactly as (column, weight at column, weight at column + 1).
class SoftWarpMatrix {
 public:
  struct Row {
    std::size_t column = 0;
    double lower = 1.0;
    double upper = 0.0;
  };

  SoftWarpMatrix() = default;

  /// Rows that sample the source at the (clamped) fractional positions given.
  static SoftWarpMatrix from_positions(std::span<const double> positions, std::size_t source_len);

  static SoftWarpMatrix identity(std::size_t length);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const Row& row(std::size_t i) const { return rows_[i]; }
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> dense() const;

 private:
  std::vector<Row> rows_;
  std::size_t cols_ = 0;
};

/// Source position sampled by each output step: u_i = tau(i) (unclamped).
std::vector<double> source_positions(const PiecewiseLinearWarp& warp);

SoftWarpMatrix build_soft_matrix(const PiecewiseLinearWarp& warp, std::size_t source_len);

Series apply_warp(const SoftWarpMatrix& w, const Series& series);

/// Gradients of a scalar objective w.r.t. slopes and normalized durations,
/// given d(objective)/d(warped series). Clamped rows contribute nothing.
struct WarpGradient {
  std::vector<double> slopes;
  std::vector<double> durations;
};

WarpGradient soft_warp_backward(const PiecewiseLinearWarp& warp, const Series& source,
                                const Series& upstream);

/// Index pairs (output step, source step), zero-based.
struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
};

/// Boundary, monotonicity and step-continuity check for a path between
/// sequences of length n and m.
bool is_valid_path(const WarpPath& path, std::size_t n, std::size_t m);

WarpPath hard_warp_path(const PiecewiseLinearWarp& warp, std::size_t source_len);

}  // namespace warpalign
