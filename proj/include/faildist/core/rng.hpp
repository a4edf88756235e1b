#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace faildist {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic generator for stream (a, b, c) under a master seed. Streams
/// with different coordinates are statistically independent.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                       std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(a + 1));
  h = mix64(h ^ mix64((b + 1) * 0x100000001b3ULL));
  h = mix64(h ^ mix64((c + 1) * 0xc2b2ae3d27d4eb4fULL));
  return Rng{h};
}

/// Uniform double in [0, 1) with 53 bits of resolution. Independent of the
/// standard library's distribution implementations so streams are portable.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Inverse-CDF draw from unnormalized nonnegative weights. Returns the last
/// index with positive weight if rounding pushes the target past the total.
inline std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

}  // namespace faildist
