#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bitefuse/stats.hpp"

namespace bitefuse {

// splitmix64 finalizer. Used to derive independent per-item seeds from a
// master seed plus indices, so parallel loops stay deterministic no matter
// how iterations are scheduled.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix64(derive_seed(seed, a) ^ mix64(b + 0x5851f42d4c957f2dULL));
}

// Deterministic RNG with pinned sampling algorithms. std::mt19937_64 is
// fully specified by the standard, but std::*_distribution is not; every
// distribution here is hand-rolled so outputs are identical across
// platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // (0,1), never returns an exact endpoint
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased integer in [0,n), rejection sampling
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  // inclusive range
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // inverse-CDF sampling
  double normal(double mu, double sigma) {
    return mu + sigma * normal_quantile(uniform_open());
  }

  // Knuth multiplication method; exact for the small rates used here
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    int k = 0;
    for (;;) {
      prod *= uniform_open();
      if (prod <= limit) return k;
      ++k;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace bitefuse
