#pragma once

// Portable random streams. std::mt19937_64 output is fixed by the standard,
// but the std:: distributions are not, so the conversions live here:
//   uniform01: (u >> 11) * 2^-53
//   normal:    Box-Muller on two uniform01 draws, cosine branch only
//   below(m):  Lemire-free rejection on u % m with threshold (2^64 - m) % m

#include "ep4orth/types.hpp"

#include <cstdint>
#include <random>

namespace ep4orth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, m).
  std::uint64_t below(std::uint64_t m) {
    const std::uint64_t threshold = (0 - m) % m;
    for (;;) {
      const std::uint64_t u = engine_();
      if (u >= threshold) return u % m;
    }
  }

  /// Column-major fill with uniform01 draws.
  Matrix uniform_matrix(Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = uniform01();
    return out;
  }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ep4orth
