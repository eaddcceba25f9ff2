#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "adiabat/grid.hpp"
#include "adiabat/rng.hpp"

namespace testing_support {

using adiabat::cplx;
using adiabat::Grid;
using adiabat::WavefunctionState;

/// Analytic harmonic ground state sampled on the grid (then renormalized).
inline WavefunctionState sho_ground_state(const Grid& grid, double omega, double center = 0.0) {
  std::vector<cplx> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i) - center;
    s[i] = std::exp(-0.5 * omega * x * x);
  }
  return WavefunctionState::from_samples(grid, std::move(s));
}

/// Smooth random complex state: a few Gaussians with random centers, widths and phases.
inline WavefunctionState random_state(const Grid& grid, adiabat::Xoshiro256StarStar& rng) {
  const double half = 0.5 * (grid.x_max() - grid.x_min());
  const double mid = 0.5 * (grid.x_max() + grid.x_min());
  std::vector<cplx> s(grid.size());
  for (int g = 0; g < 3; ++g) {
    const double c = mid + rng.uniform(-0.6, 0.6) * half;
    const double w = rng.uniform(0.05, 0.3) * half;
    const cplx amp = std::polar(rng.uniform(0.2, 1.0), rng.uniform(0.0, 2.0 * std::numbers::pi));
    const double k = rng.uniform(-2.0, 2.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i) - c;
      s[i] += amp * std::exp(-0.5 * x * x / (w * w)) * std::polar(1.0, k * x);
    }
  }
  return WavefunctionState::from_samples(grid, std::move(s));
}

}  // namespace testing_support
