#pragma once

#include <cstdint>
#include <random>

namespace ser {

using Rng = std::mt19937_64;

// Finalizer of the splitmix64 generator; bijective on 64-bit values.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One engine per (seed, stream) pair. Distinct streams from the same seed are
// unrelated, so consuming one leaves the others untouched.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) + stream));
}

// Uniform index in [0, n), n >= 1. Consumes exactly one engine value; the
// modulo bias is below n/2^64.
inline std::size_t rand_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

// Uniform double in [0, 1). Consumes exactly one engine value.
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double rand_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(rng);
}

}  // namespace ser
