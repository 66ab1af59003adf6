#include "warpalign/metrics.hpp"

#include "warpalign/errors.hpp"

namespace warpalign {

double mpce(std::span<const DatasetAccuracy> results) {
  if (results.empty()) throw ContractViolation("mpce needs at least one dataset");
  double total = 0.0;
  for (const auto& r : results) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0) || r.classes < 1) {
      throw ContractViolation("mpce: accuracy must lie in [0, 1] and class count be >= 1");
    }
    total += (1.0 - r.accuracy) / static_cast<double>(r.classes);
  }
  return total / static_cast<double>(results.size());
}

}  // namespace warpalign
