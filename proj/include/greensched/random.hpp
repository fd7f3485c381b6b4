#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace greensched {

/// Engine used everywhere a seed appears. The distribution helpers below are
/// written out explicitly so that results do not depend on the standard
/// library's (implementation-defined) distribution algorithms.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

/// Uniform in [0, 1) with 53 random bits.
template <typename Engine>
double uniform01(Engine& rng) {
  static_assert(Engine::max() == std::numeric_limits<std::uint64_t>::max());
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Engine>
double uniform_real(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, bound). bound must be > 0. Rejection sampling, no
/// modulo bias.
template <typename Engine>
std::uint64_t uniform_index(Engine& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename Engine>
bool bernoulli(Engine& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

}  // namespace greensched
