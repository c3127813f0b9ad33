#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace binhash {

// All randomness in the library flows through these helpers so that results
// are reproducible bit-for-bit across platforms. std::uniform_int_distribution
// and std::normal_distribution are implementation-defined, so we only rely on
// the standardized mt19937_64 output stream.

using Rng = std::mt19937_64;

/// Independent deterministic stream derived from (seed, stream id).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  // splitmix64 of the pair; avoids correlated mt19937_64 states for nearby seeds
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return Rng(z);
}

/// Unbiased integer in [0, bound) via rejection sampling.
inline std::uint64_t bounded_uint(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bounded_uint: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline double rand_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

/// Uniform double in (0, 1].
inline double rand_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; one value per call.
inline double rand_gaussian(Rng& rng) {
  const double u1 = rand_open01(rng);
  const double u2 = rand_open01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// k distinct indices drawn uniformly from [0, n), in draw order
/// (partial Fisher-Yates).
inline std::vector<std::uint64_t> sample_without_replacement(Rng& rng, std::uint64_t n,
                                                             std::uint64_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::uint64_t> pool(n);
  for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + bounded_uint(rng, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace binhash
