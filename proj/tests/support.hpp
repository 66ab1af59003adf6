#pragma once

// Shared helpers for the test suites: random generators and small reference
// implementations that deliberately avoid the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "warpalign/network.hpp"
#include "warpalign/series.hpp"

namespace wa_test {

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline warpalign::Series random_series(std::mt19937_64& gen, std::size_t len,
                                       std::size_t dims = 1) {
  return warpalign::Series(dims, len, random_vector(gen, dims * len));
}

inline warpalign::Series gaussian_bump(std::size_t len, double center, double sigma) {
  std::vector<double> v(len);
  for (std::size_t t = 0; t < len; ++t) {
    const double z = (static_cast<double>(t) - center) / sigma;
    v[t] = std::exp(-0.5 * z * z);
  }
  return warpalign::Series::univariate(std::move(v));
}

// Gaussian bumps of width 8 centred at T/2 with shifts drawn from
// [-0.1 T, 0.1 T].
inline std::vector<warpalign::Series> shifted_bumps(std::size_t count, std::size_t len,
                                                    std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double max_shift = 0.1 * static_cast<double>(len);
  std::uniform_real_distribution<double> shift(-max_shift, max_shift);
  std::vector<warpalign::Series> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(gaussian_bump(len, 0.5 * static_cast<double>(len) + shift(gen), 8.0));
  }
  return out;
}

// Minimum accumulated cost over every monotone, continuous path from (0,0)
// to (n-1, m-1), by plain recursion.
inline double brute_force_dtw(const std::vector<double>& x, const std::vector<double>& y,
                              bool squared = true) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  auto cost = [&](std::size_t i, std::size_t j) {
    const double d = x[i] - y[j];
    return squared ? d * d : std::abs(d);
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j,
                                                                   double acc) {
    acc += cost(i, j);
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Reference loss straight from the definitions.
inline double reference_signed_square(const std::vector<double>& x, const std::vector<double>& y,
                                      double eps = 1e-8) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  const double s = dot / std::max(std::sqrt(nx) * std::sqrt(ny), eps);
  const double sign = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
  return 1.0 - s * s * sign;
}

inline double reference_penalization(const std::vector<double>& a, double lambda1) {
  double sq = 0.0, ms = 0.0;
  for (double v : a) {
    sq += (v - 1.0) * (v - 1.0);
    ms += v * v;
  }
  ms /= static_cast<double>(a.size());
  return sq + lambda1 / (ms + 0.1);
}

// Piecewise-linear tau evaluated by integrating the slope over unit
// sub-steps; independent of the closed form used by the library.
inline double reference_tau(const std::vector<double>& slopes, const std::vector<double>& durations,
                            double t) {
  double acc = 0.0;
  double start = 0.0;
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    const double end = start + durations[k];
    const bool last = k + 1 == slopes.size();
    if (t <= end || last) return acc + slopes[k] * (t - start);
    acc += slopes[k] * durations[k];
    start = end;
  }
  return acc;
}

// Linear interpolation of x at fractional position u, clamped to the range.
inline double interpolate(const std::vector<double>& x, double u) {
  const double hi = static_cast<double>(x.size() - 1);
  u = std::clamp(u, 0.0, hi);
  const auto j = static_cast<std::size_t>(std::floor(u));
  if (j + 1 >= x.size()) return x.back();
  const double f = u - static_cast<double>(j);
  return (1.0 - f) * x[j] + f * x[j + 1];
}

inline double relative_error(double analytic, double numeric, double floor_abs) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= floor_abs) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

// Network whose heads ignore the features and emit slopes 1 and equal
// durations: the identity warp for every input.
inline warpalign::WarperNetwork identity_network(warpalign::NetConfig cfg, std::uint64_t seed = 1) {
  warpalign::WarperNetwork net(cfg, seed);
  const auto K = cfg.segments;
  for (auto span : {net.head_a_weights(), net.head_t_weights()}) {
    for (std::size_t i = 0; i < span.size; ++i) net.set_parameter(span.offset + i, 0.0);
  }
  for (std::size_t k = 0; k < K; ++k) {
    net.set_parameter(net.head_a_bias().offset + k, 1.0);
    net.set_parameter(net.head_t_bias().offset + k,
                      static_cast<double>(cfg.input_len) / static_cast<double>(K));
  }
  return net;
}

inline std::vector<double> as_vector(const warpalign::Series& s) { return s.values(); }

}  // namespace wa_test
