#include "warpalign/warp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "warpalign/errors.hpp"

namespace warpalign {
namespace {

constexpr double kDegenerateSum = 1e-8;

void require_shape(const PiecewiseLinearWarp& warp) {
  if (warp.slopes.empty()) throw ContractViolation("warp needs at least one segment");
  if (warp.slopes.size() != warp.durations.size()) {
    throw ContractViolation("warp slopes and durations differ in count");
  }
}

// Walks output steps 0..T-1 in order, tracking the active segment (the first
// one whose window has not been passed yet).
template <class Visit>
void for_each_step(const PiecewiseLinearWarp& warp, Visit&& visit) {
  const auto K = warp.segments();
  std::size_t j = 0;
  double start = 0.0;  // cumulative duration before segment j
  double base = 0.0;   // tau at `start`
  for (std::size_t i = 0; i < warp.length; ++i) {
    const auto t = static_cast<double>(i);
    while (j + 1 < K && t >= start + warp.durations[j]) {
      base += warp.slopes[j] * warp.durations[j];
      start += warp.durations[j];
      ++j;
    }
    visit(i, j, start, base + warp.slopes[j] * (t - start));
  }
}

}  // namespace

PiecewiseLinearWarp PiecewiseLinearWarp::identity(std::size_t segments, std::size_t length) {
  if (segments == 0) throw ContractViolation("identity warp needs at least one segment");
  PiecewiseLinearWarp w;
  w.slopes.assign(segments, 1.0);
  w.durations.assign(segments, static_cast<double>(length) / static_cast<double>(segments));
  w.length = length;
  return w;
}

std::vector<double> normalize_durations(std::span<const double> raw, std::size_t length) {
  if (raw.empty()) throw ContractViolation("normalize_durations: no segments");
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  const double T = static_cast<double>(length);
  std::vector<double> out(raw.size());
  if (sum < kDegenerateSum) {
    std::fill(out.begin(), out.end(), T / static_cast<double>(raw.size()));
    return out;
  }
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k] < 0.0) throw ContractViolation("normalize_durations: negative raw duration");
    out[k] = T * raw[k] / sum;
  }
  return out;
}

std::vector<double> normalize_durations_backward(std::span<const double> raw, std::size_t length,
                                                 std::span<const double> upstream) {
  if (raw.size() != upstream.size()) {
    throw ContractViolation("normalize_durations_backward: size mismatch");
  }
  std::vector<double> grad(raw.size(), 0.0);
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (sum < kDegenerateSum) return grad;
  const double T = static_cast<double>(length);
  // d out_k / d raw_m = T (delta_km / S - raw_k / S^2)
  double weighted = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) weighted += upstream[k] * raw[k];
  for (std::size_t m = 0; m < raw.size(); ++m) {
    grad[m] = T * (upstream[m] / sum - weighted / (sum * sum));
  }
  return grad;
}

double eval_tau(const PiecewiseLinearWarp& warp, double t) {
  require_shape(warp);
  const double T = static_cast<double>(warp.length);
  const double slack = 1e-9 * std::max(1.0, T);
  if (!(t >= -slack && t <= T + slack)) {
    throw ContractViolation("eval_tau: t outside [0, T]");
  }
  const auto K = warp.segments();
  double start = 0.0;
  double base = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    if (t < start + warp.durations[j] || j + 1 == K) {
      return base + warp.slopes[j] * (t - start);
    }
    base += warp.slopes[j] * warp.durations[j];
    start += warp.durations[j];
  }
  return base;
}

ConstraintReport check_constraints(const PiecewiseLinearWarp& warp) {
  ConstraintReport report;
  if (warp.slopes.empty() || warp.slopes.size() != warp.durations.size()) return report;
  const double total = std::accumulate(warp.durations.begin(), warp.durations.end(), 0.0);
  report.boundary = eval_tau(warp, 0.0) == 0.0 &&
                    std::abs(total - static_cast<double>(warp.length)) <= 1e-6;
  report.monotonicity = *std::min_element(warp.slopes.begin(), warp.slopes.end()) >= 0.0;
  // The piecewise form telescopes, so it is continuous by construction.
  report.continuity = true;
  return report;
}

SoftWarpMatrix SoftWarpMatrix::from_positions(std::span<const double> positions,
                                              std::size_t source_len) {
  if (source_len < 2) throw ContractViolation("soft warp needs a source of length >= 2");
  SoftWarpMatrix w;
  w.cols_ = source_len;
  w.rows_.reserve(positions.size());
  const double last = static_cast<double>(source_len - 1);
  for (double u : positions) {
    u = std::clamp(u, 0.0, last);
    Row row;
    const double f = std::floor(u);
    row.column = static_cast<std::size_t>(f);
    if (row.column >= source_len - 1) {
      row.column = source_len - 1;
      row.lower = 1.0;
      row.upper = 0.0;
    } else {
      const double frac = u - f;
      row.lower = 1.0 - frac;
      row.upper = frac;
    }
    w.rows_.push_back(row);
  }
  return w;
}

SoftWarpMatrix SoftWarpMatrix::identity(std::size_t length) {
  std::vector<double> u(length);
  std::iota(u.begin(), u.end(), 0.0);
  return from_positions(u, length);
}

double SoftWarpMatrix::at(std::size_t i, std::size_t j) const {
  const Row& r = rows_.at(i);
  if (j == r.column) return r.lower;
  if (j == r.column + 1) return r.upper;
  return 0.0;
}

std::vector<double> SoftWarpMatrix::dense() const {
  std::vector<double> out(rows() * cols_, 0.0);
  for (std::size_t i = 0; i < rows(); ++i) {
    const Row& r = rows_[i];
    out[i * cols_ + r.column] = r.lower;
    if (r.column + 1 < cols_) out[i * cols_ + r.column + 1] = r.upper;
  }
  return out;
}

std::vector<double> source_positions(const PiecewiseLinearWarp& warp) {
  require_shape(warp);
  std::vector<double> u(warp.length);
  for_each_step(warp, [&](std::size_t i, std::size_t, double, double tau) { u[i] = tau; });
  return u;
}

SoftWarpMatrix build_soft_matrix(const PiecewiseLinearWarp& warp, std::size_t source_len) {
  return SoftWarpMatrix::from_positions(source_positions(warp), source_len);
}

Series apply_warp(const SoftWarpMatrix& w, const Series& series) {
  if (w.cols() != series.length()) {
    throw ContractViolation("apply_warp: matrix has " + std::to_string(w.cols()) +
                            " columns, series has " + std::to_string(series.length()) +
                            " samples");
  }
  const auto T = w.rows();
  std::vector<double> out(series.dims() * T);
  for (std::size_t r = 0; r < series.dims(); ++r) {
    const auto x = series.row(r);
    for (std::size_t i = 0; i < T; ++i) {
      const auto& row = w.row(i);
      double v = row.lower * x[row.column];
      if (row.upper != 0.0) v += row.upper * x[row.column + 1];
      out[r * T + i] = v;
    }
  }
  return Series(series.dims(), T, std::move(out));
}

WarpGradient soft_warp_backward(const PiecewiseLinearWarp& warp, const Series& source,
                                const Series& upstream) {
  require_shape(warp);
  if (upstream.length() != warp.length || upstream.dims() != source.dims()) {
    throw ContractViolation("soft_warp_backward: upstream shape mismatch");
  }
  const auto K = warp.segments();
  const auto n = source.length();
  const double last = static_cast<double>(n - 1);
  WarpGradient g{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  for_each_step(warp, [&](std::size_t i, std::size_t j, double start, double tau) {
    if (tau < 0.0 || tau >= last) return;  // clamped
    const auto f = static_cast<std::size_t>(std::floor(tau));
    double g_u = 0.0;
    for (std::size_t r = 0; r < source.dims(); ++r) {
      g_u += upstream.at(r, i) * (source.at(r, f + 1) - source.at(r, f));
    }
    if (g_u == 0.0) return;
    const double t = static_cast<double>(i);
    for (std::size_t k = 0; k < j; ++k) {
      g.slopes[k] += g_u * warp.durations[k];
      g.durations[k] += g_u * (warp.slopes[k] - warp.slopes[j]);
    }
    g.slopes[j] += g_u * (t - start);
  });
  return g;
}

bool is_valid_path(const WarpPath& path, std::size_t n, std::size_t m) {
  if (path.pairs.empty() || n == 0 || m == 0) return false;
  if (path.pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (path.pairs.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t l = 1; l < path.pairs.size(); ++l) {
    const auto [a0, b0] = path.pairs[l - 1];
    const auto [a1, b1] = path.pairs[l];
    if (a1 < a0 || b1 < b0) return false;
    const auto da = a1 - a0;
    const auto db = b1 - b0;
    if (da > 1 || db > 1 || (da == 0 && db == 0)) return false;
  }
  return true;
}

WarpPath hard_warp_path(const PiecewiseLinearWarp& warp, std::size_t source_len) {
  if (source_len == 0 || warp.length == 0) throw ContractViolation("hard_warp_path: empty input");
  const auto u = source_positions(warp);
  const double last = static_cast<double>(source_len - 1);
  WarpPath path;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto m = static_cast<std::size_t>(std::round(std::clamp(u[i], 0.0, last)));
    if (i == 0) m = 0;
    m = std::max(m, prev);
    if (i > 0) {
      // Fill skipped source samples on the previous output step.
      for (auto s = prev + 1; s < m; ++s) path.pairs.emplace_back(i - 1, s);
    }
    path.pairs.emplace_back(i, m);
    prev = m;
  }
  for (auto s = prev + 1; s < source_len; ++s) path.pairs.emplace_back(u.size() - 1, s);
  return path;
}

}  // namespace warpalign
