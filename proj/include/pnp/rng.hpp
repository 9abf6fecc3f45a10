#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pnp/image.hpp"

namespace pnp {

/// Seeded pseudo-random generator used for all randomness in the library.
///
/// Algorithm (fixed, so streams can be reproduced in other languages):
///
///   * State: xoshiro256** (Blackman & Vigna), four 64-bit words s[0..3].
///   * Seeding: the four words are the first four outputs of SplitMix64
///     started at `seed`:
///         z = (state += 0x9e3779b97f4a7c15)
///         z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
///         z = (z ^ (z >> 27)) * 0x94d049bb133111eb
///         return z ^ (z >> 31)
///   * next_u64(): result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
///         s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
///   * uniform(): (next_u64() >> 11) * 2^-53, in [0, 1).
///   * uniform_index(n): rejection sampling. Draw r = next_u64() until
///     r >= (2^64 - n) mod n, then return r mod n.
///   * normal(): Box-Muller on pairs. u1 = ((next_u64() >> 11) + 1) * 2^-53 in
///     (0, 1], u2 = uniform(); radius = sqrt(-2 ln u1);
///     returns radius*cos(2 pi u2) and caches radius*sin(2 pi u2) for the
///     following call.
///
/// Test vectors (seed 0): next_u64() yields 0x99ec5f36cb75f2b4,
/// 0xbf6e1f784956452a, 0x1a5f849d4933e6e0 (see tests/unit/test_core.cpp).
///
/// Single owner; not thread safe.
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform();
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

  /// In-place Fisher-Yates shuffle, i from n-1 down to 1, j = uniform_index(i+1).
  template <typename T> void shuffle(std::vector<T> &items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_normal_;
};

/// SplitMix64 step; exposed for seeding derived generators.
std::uint64_t splitmix64(std::uint64_t &state);

/// i.i.d. N(0, sigma^2) samples in row-major order. sigma == 0 gives zeros
/// without consuming any randomness.
Image gaussian_noise(SeededRng &rng, const Shape &shape, double sigma);

} // namespace pnp
