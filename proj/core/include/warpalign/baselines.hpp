#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "warpalign/dataset.hpp"
#include "warpalign/series.hpp"
#include "warpalign/warp.hpp"

namespace warpalign {

enum class LocalCost { Squared, Absolute };

struct DtwOptions {
  LocalCost cost = LocalCost::Squared;
  std::optional<std::size_t> band;  // Sakoe-Chiba half-width; unconstrained when empty
};

struct DtwResult {
  double distance = 0.0;
  WarpPath path;
};

/// Full dynamic-programming DTW on univariate series. Backtracking prefers the
/// diagonal step, then (1,0), then (0,1).
DtwResult dtw(std::span<const double> x, std::span<const double> y, const DtwOptions& opts = {});
DtwResult dtw(const Series& x, const Series& y, const DtwOptions& opts = {});

/// Distance only; O(M) memory.
double dtw_distance(std::span<const double> x, std::span<const double> y,
                    const DtwOptions& opts = {});

struct NearestMatch {
  double distance = 0.0;
  std::size_t index = 0;
};

NearestMatch dtw_distance_to_set(const Series& x, std::span<const Series> members,
                                 const DtwOptions& opts = {});

struct BarycenterState {
  Series barycenter;
  std::size_t iteration = 0;
  double objective = 0.0;
  std::vector<double> history;  // objective of the initial average, then after each update
};

/// Member with the least summed DTW distance to the others (lowest index on ties).
std::size_t medoid_index(std::span<const Series> members, const DtwOptions& opts = {});

BarycenterState dba_average(std::span<const Series> members, const Series& init,
                            std::size_t max_iter, double tol, const DtwOptions& opts = {});

/// DBA initialized from the medoid.
BarycenterState dba_average(const ClassGroup& group, std::size_t max_iter = 10, double tol = 1e-5,
                            const DtwOptions& opts = {});

}  // namespace warpalign
