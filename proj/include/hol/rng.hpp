#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace hol {

// Named sub-streams so that splitting, simulation, tie-breaking and fold
// assignment stay independently reproducible from one seed.
enum class Stream : std::uint32_t {
  split = 1,
  simulate = 2,
  tiebreak = 3,
  fold = 4,
  synthetic = 5,
};

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// The standard distributions are implementation-defined; these two helpers
// keep draws identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - (~std::uint64_t{0} % bound));
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

template <typename It>
void shuffle_range(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_below(rng, i);
    std::iter_swap(first + (i - 1), first + j);
  }
}

}  // namespace hol
