#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace isac {

/// Seeded random stream with explicit sample mappings so that draws are
/// reproducible across platforms and standard-library versions. Streams
/// are splittable: each logical entity owns its own sub-stream, which
/// keeps generation independent of draw ordering elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(scramble(seed)) {}

  /// Derive an independent child stream. Children with distinct ids are
  /// decorrelated from each other and from the parent.
  Rng stream(std::uint64_t stream_id) const {
    return Rng(scramble(seed_ ^ (0x9E3779B97F4A7C15ull * (stream_id + 1))));
  }

  std::uint64_t bits() { return gen_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no state caching, so the draw count
  /// per call is fixed).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double stddev) { return stddev * normal(); }

  /// Circularly-symmetric complex Gaussian CN(0, variance).
  std::complex<double> cnormal(double variance) {
    double s = std::sqrt(variance / 2.0);
    double re = normal();
    double im = normal();
    return {s * re, s * im};
  }

  std::uint64_t seed() const { return seed_; }

 private:
  // splitmix64 finalizer; decouples nearby seeds.
  static std::uint64_t scramble(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace isac
