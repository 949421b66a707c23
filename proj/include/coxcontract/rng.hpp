#pragma once

// Self-contained random streams with counter-based derivation.
//
// Every stream is derived from (root seed, purpose tag, index), so adding
// work items never perturbs the streams of existing ones and results are
// reproducible bit-for-bit regardless of thread scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace coxcontract {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// xoshiro256** stream with distribution samplers. Copyable value type; a
/// stream must not be shared between threads without external ownership.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  /// Derive an independent stream from (root, tag, index).
  static Rng derive(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    std::uint64_t sm = root ^ detail::fnv1a64(tag);
    sm = detail::splitmix64(sm) + index * 0x9e3779b97f4a7c15ull;
    return Rng(detail::splitmix64(sm));
  }

  /// Collapse a derived stream to a fresh 64-bit seed (for nested derivation).
  static std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    Rng r = derive(root, tag, index);
    return r.next_u64();
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double exponential(double rate = 1.0) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u) / rate;
  }

  /// Gamma(shape, rate) via Marsaglia-Tsang squeeze.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
      // Boost to shape+1 and correct with U^{1/shape}.
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  /// Poisson(mean). Chunked product-of-uniforms: exact for any finite mean by
  /// Poisson additivity, O(mean) uniforms.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("Rng::poisson: mean must be finite and non-negative");
    std::uint64_t total = 0;
    constexpr double kChunk = 50.0;
    while (mean > kChunk) {
      total += poisson_small(kChunk);
      mean -= kChunk;
    }
    return total + poisson_small(mean);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace coxcontract
