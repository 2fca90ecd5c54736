// Deterministic random numbers for tests and the CLI.  Distributions are
// implemented from raw mt19937_64 output (std::uniform_* distributions are
// implementation-defined, which would break byte-identical reruns).
#pragma once

#include <cstdint>
#include <random>

namespace rotframe {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive (modulo bias is irrelevant here;
  // determinism is what matters).
  long long uniform_int(long long lo, long long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(eng_() % span);
  }

  // Standard normal via Box-Muller (deterministic, no cached state).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rotframe
