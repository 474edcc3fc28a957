#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dispatchlab {

// Seeded generator with explicit variate mappings. The mt19937_64 engine is
// pinned by the standard, but the std:: distributions are
// implementation-defined, which would break replays across toolchains; the
// few mappings we need are spelled out here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

  // Box-Muller, cosine branch.
  double normal(double mean, double sigma) {
    double u1 = uniform();
    const double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();  // keep log() finite
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dispatchlab
