#pragma once

// Seedable 64-bit generator used everywhere results must be reproducible
// bit-for-bit. Core generator: xoshiro256++ (Blackman & Vigna), state seeded
// with a splitmix64 sequence. Uniforms take the top 53 bits of the output;
// Gaussians apply the cosine Box-Muller transform, consuming exactly two
// uniforms per draw (no caching of the sine mate).

#include <cmath>
#include <cstdint>
#include <numbers>

namespace phidro {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  // Independent substream for (master seed, index); used to make parallel
  // draws schedule-independent.
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    std::uint64_t sm = master ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Unbiased uniform index in [0, n); n >= 1. Rejection-free via 128-bit
  // multiply (Lemire), then a correction loop for the biased slice.
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (0ULL - n) % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2),
  // u1 in (0, 1].
  double next_gaussian() {
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace phidro
