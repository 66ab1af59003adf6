#include "warpalign/series.hpp"

#include <cmath>
#include <string>

#include "warpalign/errors.hpp"

namespace warpalign {

Series::Series(std::size_t dims, std::size_t length, std::vector<double> values)
    : dims_(dims), length_(length), values_(std::move(values)) {
  if (dims_ < 1) throw ContractViolation("series needs at least one dimension");
  if (length_ < 2) {
    throw ContractViolation("series needs at least 2 samples, got " + std::to_string(length_));
  }
  if (values_.size() != dims_ * length_) {
    throw ContractViolation("series value count does not match dims x length");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ContractViolation("series contains a non-finite value");
  }
}

Series Series::univariate(std::vector<double> values) {
  const auto n = values.size();
  return Series(1, n, std::move(values));
}

std::span<const double> Series::row(std::size_t r) const {
  if (r >= dims_) throw ContractViolation("series row out of range");
  return std::span<const double>(values_).subspan(r * length_, length_);
}

Series scaled(const Series& series, double factor) {
  std::vector<double> v = series.values();
  for (double& x : v) x *= factor;
  return Series(series.dims(), series.length(), std::move(v));
}

Series mean_series(std::span<const Series> members) {
  if (members.empty()) throw ContractViolation("mean of an empty set of series");
  const Series& first = members.front();
  std::vector<double> acc(first.values().size(), 0.0);
  for (const Series& s : members) {
    if (s.dims() != first.dims() || s.length() != first.length()) {
      throw ContractViolation("mean_series: shapes differ");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s.values()[i];
  }
  const double n = static_cast<double>(members.size());
  for (double& x : acc) x /= n;
  return Series(first.dims(), first.length(), std::move(acc));
}

}  // namespace warpalign
