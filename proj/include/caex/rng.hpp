#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace caex {

// Deterministic random helpers. All sampling is hand-rolled on top of
// std::mt19937_64 (whose output sequence is fixed by the standard) so that
// seeded results are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  bool flip(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 eng_;
};

}  // namespace caex
