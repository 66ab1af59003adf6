#include "warpalign/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpalign/errors.hpp"

namespace warpalign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double local_cost(double a, double b, LocalCost cost) {
  const double d = a - b;
  return cost == LocalCost::Squared ? d * d : std::abs(d);
}

bool in_band(std::size_t i, std::size_t j, std::size_t n, std::size_t m,
             const std::optional<std::size_t>& band) {
  if (!band) return true;
  const std::size_t width = std::max(*band, n > m ? n - m : m - n);
  const std::size_t diff = i > j ? i - j : j - i;
  return diff <= width;
}

std::span<const double> univariate(const Series& s) {
  if (s.dims() != 1) throw ContractViolation("dtw baseline is univariate only");
  return s.row(0);
}

}  // namespace

DtwResult dtw(std::span<const double> x, std::span<const double> y, const DtwOptions& opts) {
  const auto n = x.size();
  const auto m = y.size();
  if (n == 0 || m == 0) throw ContractViolation("dtw on an empty sequence");
  std::vector<double> acc(n * m, kInf);
  auto D = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_band(i, j, n, m, opts.band)) continue;
      const double c = local_cost(x[i], y[j], opts.cost);
      if (i == 0 && j == 0) {
        D(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = D(i - 1, j - 1);
      if (i > 0) best = std::min(best, D(i - 1, j));
      if (j > 0) best = std::min(best, D(i, j - 1));
      D(i, j) = c + best;
    }
  }
  DtwResult result;
  result.distance = D(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  result.path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = D(i - 1, j - 1);
      const double up = D(i - 1, j);
      const double left = D(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    result.path.pairs.emplace_back(i, j);
  }
  std::reverse(result.path.pairs.begin(), result.path.pairs.end());
  return result;
}

DtwResult dtw(const Series& x, const Series& y, const DtwOptions& opts) {
  return dtw(univariate(x), univariate(y), opts);
}

double dtw_distance(std::span<const double> x, std::span<const double> y,
                    const DtwOptions& opts) {
  const auto n = x.size();
  const auto m = y.size();
  if (n == 0 || m == 0) throw ContractViolation("dtw on an empty sequence");
  std::vector<double> prev(m, kInf);
  std::vector<double> cur(m, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_band(i, j, n, m, opts.band)) continue;
      const double c = local_cost(x[i], y[j], opts.cost);
      if (i == 0 && j == 0) {
        cur[j] = c;
        continue;
      }
      double best = kInf;
      if (i > 0) {
        best = prev[j];
        if (j > 0) best = std::min(best, prev[j - 1]);
      }
      if (j > 0) best = std::min(best, cur[j - 1]);
      cur[j] = c + best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

NearestMatch dtw_distance_to_set(const Series& x, std::span<const Series> members,
                                 const DtwOptions& opts) {
  if (members.empty()) throw ContractViolation("dtw_distance_to_set: empty set");
  NearestMatch best{kInf, 0};
  const auto xs = univariate(x);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double d = dtw_distance(xs, univariate(members[i]), opts);
    if (d < best.distance) best = {d, i};
  }
  return best;
}

std::size_t medoid_index(std::span<const Series> members, const DtwOptions& opts) {
  if (members.empty()) throw ContractViolation("medoid of an empty set");
  const auto n = members.size();
  std::vector<double> sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dtw_distance(univariate(members[i]), univariate(members[j]), opts);
      sums[i] += d;
      sums[j] += d;
    }
  }
  return static_cast<std::size_t>(std::min_element(sums.begin(), sums.end()) - sums.begin());
}

namespace {

double dba_objective(const std::vector<double>& bary, std::span<const Series> members,
                     const DtwOptions& opts) {
  double total = 0.0;
  for (const auto& s : members) total += dtw_distance(bary, univariate(s), opts);
  return total;
}

}  // namespace

BarycenterState dba_average(std::span<const Series> members, const Series& init,
                            std::size_t max_iter, double tol, const DtwOptions& opts) {
  if (members.empty()) throw ContractViolation("dba_average: empty group");
  const auto init_values = univariate(init);
  std::vector<double> bary(init_values.begin(), init_values.end());
  BarycenterState state;
  state.objective = dba_objective(bary, members, opts);
  state.history.push_back(state.objective);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> sums(bary.size(), 0.0);
    std::vector<std::size_t> counts(bary.size(), 0);
    for (const auto& s : members) {
      const auto values = univariate(s);
      const auto path = dtw(bary, values, opts).path;
      for (const auto& [b, k] : path.pairs) {
        sums[b] += values[k];
        ++counts[b];
      }
    }
    std::vector<double> next(bary.size());
    for (std::size_t t = 0; t < bary.size(); ++t) next[t] = sums[t] / static_cast<double>(counts[t]);
    const double objective = dba_objective(next, members, opts);
    const double previous = state.objective;
    state.iteration = it;
    if (objective > previous) break;  // rounding noise only; keep the better average
    bary = std::move(next);
    state.objective = objective;
    state.history.push_back(objective);
    if (previous <= 0.0 || (previous - objective) / previous < tol) break;
  }
  state.barycenter = Series::univariate(std::move(bary));
  return state;
}

BarycenterState dba_average(const ClassGroup& group, std::size_t max_iter, double tol,
                            const DtwOptions& opts) {
  if (group.series.empty()) throw ContractViolation("dba_average: empty group");
  const auto init = medoid_index(group.series, opts);
  return dba_average(group.series, group.series[init], max_iter, tol, opts);
}

}  // namespace warpalign
