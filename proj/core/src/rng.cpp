#include "warpalign/rng.hpp"

#include <algorithm>
#include <numeric>

#include "warpalign/errors.hpp"

namespace warpalign {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream)));
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw ContractViolation("uniform_index: empty range");
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t lo, std::size_t hi,
                                                    std::size_t count) {
  if (hi < lo || count > hi - lo) {
    throw ContractViolation("sample_without_replacement: not enough candidates");
  }
  std::vector<std::size_t> pool(hi - lo);
  std::iota(pool.begin(), pool.end(), lo);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace warpalign
