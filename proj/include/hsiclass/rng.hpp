#pragma once

#include <cmath>
#include <cstdint>

namespace hsiclass::rng {

// Counter-based generator: every variate is a pure function of (seed, counter),
// so draws are reproducible and order-independent no matter how the work that
// consumes them is scheduled.

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer applied to seed + (counter+1)*gamma.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * kGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in [0, 1), 53 mantissa bits.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(mix(seed, counter) >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe as a log argument.
inline double uniform_open(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>((mix(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

// Uniform integer in [0, n), n >= 1. Multiply-shift; bias is < 2^-32 for the
// small n used here (class counts, pixel picks).
inline std::uint32_t uniform_below(std::uint64_t seed, std::uint64_t counter,
                                   std::uint32_t n) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(mix(seed, counter)) * n) >> 64);
}

// Standard normal via Box-Muller. Consumes counters 2c and 2c+1 so adjacent
// logical draws never share raw bits.
inline double gaussian(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = uniform_open(seed, 2 * counter);
  const double u2 = uniform01(seed, 2 * counter + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace hsiclass::rng
