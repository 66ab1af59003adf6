#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace warpalign {

// All sampling uses std::mt19937_64 (64-bit Mersenne Twister, fixed by the
// standard) seeded through splitmix64 so nearby seeds give unrelated streams.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform integer in [0, bound) by rejection; identical across standard libraries.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform real in [0, 1) from the top 53 bits.
double uniform_unit(Rng& rng);

/// `count` distinct values from [lo, hi) in ascending order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t lo, std::size_t hi,
                                                    std::size_t count);

}  // namespace warpalign
