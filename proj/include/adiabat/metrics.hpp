#pragma once

// Natural metrics between wavefunctions and between densities, the closed
// form ratio for two harmonic ground states, and the through-origin fit used
// for ground-state families.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "adiabat/grid.hpp"

namespace adiabat {

/// One point in the (D_psi, D_n) plane.
struct MetricPair {
  double d_psi = 0.0;
  double d_n = 0.0;
};

/// Radicand slack below zero tolerated before the inputs count as unnormalized.
inline constexpr double kRadicandSlack = 1e-12;

/// D_psi = sqrt(2N - 2N |<psi1|psi2>|) for states normalized to N.
///
/// Evaluated as sqrt(N) * || psi1 - e^{i phi} psi2 || with phi aligning the
/// overlap phase. For unit-norm inputs this equals the closed form, but it is
/// free of the cancellation in 2 - 2|overlap| near zero distance.
inline double wavefunction_distance(const WavefunctionState& psi1, const WavefunctionState& psi2,
                                    int particles = 1) {
  require_same_grid(psi1.grid(), psi2.grid(), "wavefunction_distance");
  if (particles < 1) throw std::invalid_argument("wavefunction_distance: particle number must be >= 1");
  const cplx overlap = inner_product(psi1, psi2);
  const double modulus = std::abs(overlap);
  const double radicand = 2.0 - 2.0 * modulus;
  if (radicand < -kRadicandSlack)
    throw NormalizationError(
        fmt::format("wavefunction_distance: |overlap| = {:.17g} exceeds 1; inputs not normalized", modulus));

  const cplx align = modulus > 0.0 ? std::conj(overlap) / modulus : cplx{1.0, 0.0};
  const auto a = psi1.amplitudes();
  const auto b = psi2.amplitudes();
  double sum = 0.5 * (std::norm(a.front() - align * b.front()) + std::norm(a.back() - align * b.back()));
  for (std::size_t i = 1; i + 1 < a.size(); ++i) sum += std::norm(a[i] - align * b[i]);
  return std::sqrt(static_cast<double>(particles) * sum * psi1.grid().dx());
}

/// D_n = integral |n1 - n2| dx.
inline double density_distance(const DensityProfile& n1, const DensityProfile& n2) {
  require_same_grid(n1.grid(), n2.grid(), "density_distance");
  const auto a = n1.values();
  const auto b = n2.values();
  double sum = 0.5 * (std::abs(a.front() - b.front()) + std::abs(a.back() - b.back()));
  for (std::size_t i = 1; i + 1 < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum * n1.grid().dx();
}

inline MetricPair metric_pair(const WavefunctionState& psi1, const WavefunctionState& psi2) {
  return {wavefunction_distance(psi1, psi2), density_distance(density_of(psi1), density_of(psi2))};
}

/// 4 / sqrt(e pi), the slope of D_n against D_psi for nearly equal oscillators.
inline const double kShoLimitRatio = 4.0 / std::sqrt(std::numbers::e * std::numbers::pi);

/// Analytic D_psi between the ground states of oscillators with frequency ratio nu.
inline double sho_wavefunction_distance(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("sho_wavefunction_distance: nu must be > 0");
  // overlap^2 = s = 2 sqrt(nu) / (1 + nu); 1 - s = (1 - sqrt(nu))^2 / (1 + nu).
  const double root = std::sqrt(nu);
  const double gap = (nu - 1.0) / (root + 1.0);
  const double one_minus_s = gap * gap / (1.0 + nu);
  const double s = 2.0 * root / (1.0 + nu);
  return std::sqrt(2.0 * one_minus_s / (1.0 + std::sqrt(s)));
}

/// Analytic D_n between the ground-state densities of oscillators with ratio nu.
inline double sho_density_distance(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("sho_density_distance: nu must be > 0");
  if (nu == 1.0) return 0.0;
  const double log_ratio = std::log1p(nu - 1.0) / (2.0 * (nu - 1.0));
  return 2.0 * std::abs(std::erf(std::sqrt(nu * log_ratio)) - std::erf(std::sqrt(log_ratio)));
}

/// D_n / D_psi for two harmonic ground states with frequency ratio nu.
inline double sho_ratio(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument(fmt::format("sho_ratio: nu = {} must be > 0", nu));
  if (std::abs(nu - 1.0) < 1e-6) return kShoLimitRatio;
  return sho_density_distance(nu) / sho_wavefunction_distance(nu);
}

struct SlopeFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of d_n = b d_psi; r^2 is taken against the zero-intercept model.
inline SlopeFit fit_slope_through_origin(std::span<const MetricPair> points) {
  if (points.empty()) throw std::invalid_argument("fit_slope_through_origin: no points");
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxx += p.d_psi * p.d_psi;
    sxy += p.d_psi * p.d_n;
    syy += p.d_n * p.d_n;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope_through_origin: all d_psi are zero");
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = p.d_n - slope * p.d_psi;
    ss_res += r * r;
  }
  return {slope, syy > 0.0 ? 1.0 - ss_res / syy : 1.0};
}

}  // namespace adiabat
