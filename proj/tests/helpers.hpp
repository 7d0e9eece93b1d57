#pragma once

#include <cmath>
#include <random>

#include "polariton/grid.hpp"

namespace polariton::testing {

// Smooth random complex field: Gaussian envelope times a low-passed white spectrum.
inline Field random_field(const GridPtr& grid, unsigned seed, double envelope = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexArray v(static_cast<Eigen::Index>(grid->size()));
  for (auto& z : v) z = Complex(normal(rng), normal(rng));
  v *= (-envelope * grid->radius_squared()).exp().cast<Complex>();
  grid->forward_fft(v);
  v *= (-0.05 * grid->wavenumber_squared()).exp().cast<Complex>() / static_cast<double>(grid->size());
  grid->inverse_fft(v);
  return Field(grid, v);
}

inline double rel_diff(const ComplexArray& a, const ComplexArray& b) {
  return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

inline double max_abs_diff(const ComplexArray& a, const ComplexArray& b) {
  return (a - b).abs().maxCoeff();
}

}  // namespace polariton::testing
