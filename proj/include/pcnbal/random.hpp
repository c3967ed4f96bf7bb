#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pcnbal {

// std::mt19937_64 output is fully specified by the standard, the library
// distributions are not. These helpers keep every seeded draw reproducible
// across standard library implementations.

using Rng = std::mt19937_64;

inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

/// Uniform double in [0, 1).
inline double unit_interval(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace pcnbal
