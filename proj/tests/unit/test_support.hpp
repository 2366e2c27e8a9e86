#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "fpb/grid_spectral.hpp"

namespace fpb::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) { return max_abs(a - b); }

/// Low-mode random field with normal coefficients (deterministic per seed).
inline Field smooth_random(const GridSpec& grid, std::mt19937_64& rng, int modes = 3, int components = 1) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  Field f(grid, components);
  for (int c = 0; c < components; ++c) {
    for (int a = 0; a <= modes; ++a) {
      for (int b = 0; b <= (grid.dim() == 2 ? modes : 0); ++b) {
        const double coef = nd(rng) / (1.0 + a + b);
        const double phase = ph(rng);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const auto x = grid.point(k);
          f(k, c) += coef * std::cos(grid.wavenumber(a) * x[0] + grid.wavenumber(b) * x[1] + phase);
        }
      }
    }
  }
  return f;
}

inline Field zero_mean(Field u) {
  for (int c = 0; c < u.components(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < u.points(); ++i) mean += u(i, c);
    mean /= static_cast<double>(u.points());
    for (std::size_t i = 0; i < u.points(); ++i) u(i, c) -= mean;
  }
  return u;
}

}  // namespace fpb::testing
