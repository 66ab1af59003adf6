#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace warpalign {

/// A (possibly multivariate) time series stored as `dims` rows of `length`
/// samples, row-major. Always holds at least two finite samples per row.
class Series {
 public:
  Series() = default;
  Series(std::size_t dims, std::size_t length, std::vector<double> values);

  static Series univariate(std::vector<double> values);

  std::size_t dims() const noexcept { return dims_; }
  std::size_t length() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }

  std::span<const double> row(std::size_t r) const;
  const std::vector<double>& values() const noexcept { return values_; }

  double at(std::size_t r, std::size_t t) const { return values_[r * length_ + t]; }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::size_t dims_ = 0;
  std::size_t length_ = 0;
  std::vector<double> values_;
};

Series scaled(const Series& series, double factor);

/// Element-wise arithmetic mean of equally shaped series.
Series mean_series(std::span<const Series> members);

}  // namespace warpalign
