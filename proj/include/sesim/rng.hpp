#pragma once

#include "sesim/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sesim {

/// One splitmix64 mixing step. Used to spread user seeds and to derive
/// independent child-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic random source.
///
/// Uniform doubles are assembled from raw 64-bit draws instead of going
/// through std::uniform_real_distribution, whose output is implementation
/// defined. A fixed seed therefore yields a bit-identical sample sequence on
/// every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  /// Seed for an independent child stream (one per trial, per agent, ...).
  static std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer on [0, n), unbiased via rejection. Requires n > 0.
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  /// Fair coin.
  bool flip() { return (gen_() >> 63) != 0; }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
  }

  /// Uniform over the solid ball of the given radius.
  Vec3 ball(double radius) {
    return (radius * std::cbrt(uniform())) * unit_vector();
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace sesim
