#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bats {

/// Deterministic random source. Draws are defined directly on the raw
/// mt19937_64 stream so output is reproducible across standard libraries
/// and platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in the open interval (0, 1); never returns 0 or 1.
  double uniform_open01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform index in [0, n) by rejection, so every index is equally likely.
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double normal(double mean, double sd) {
    // Box-Muller on explicit uniforms keeps the stream reproducible.
    double u1 = uniform_open01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(6.283185307179586477 * u2);
  }

  std::uint64_t raw() { return engine_(); }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives independent child streams as a pure function of (seed, index);
/// used to pre-assign one stream per bootstrap replicate so any execution
/// order yields identical results.
class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t seed) : seed_(seed) {}
  Rng stream(std::uint64_t index) const {
    return Rng(Rng::splitmix64(seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1))));
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace bats
