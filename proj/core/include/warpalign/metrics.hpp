#pragma once

#include <cstddef>
#include <span>

namespace warpalign {

struct DatasetAccuracy {
  double accuracy = 0.0;  // fraction in [0, 1]
  std::size_t classes = 1;
};

/// Mean per-class error: average over datasets of (1 - accuracy) / class count.
double mpce(std::span<const DatasetAccuracy> results);

}  // namespace warpalign
