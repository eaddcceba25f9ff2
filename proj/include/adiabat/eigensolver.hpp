#pragma once

// Finite-difference Hamiltonian H = -1/2 d^2/dx^2 + V(x, t) on the interior
// points of a hard-wall grid, and its lowest eigenpairs by Sturm-sequence
// bisection followed by inverse iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "adiabat/grid.hpp"
#include "adiabat/potentials.hpp"
#include "adiabat/rng.hpp"

namespace adiabat {

inline constexpr double kDegeneracyThreshold = 1e-12;

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric tridiagonal matrix over the interior grid points.
struct HamiltonianMatrix {
  Grid grid;
  std::vector<double> diagonal;  ///< 1/dx^2 + V(x_i, t), i = 1..n-2
  double off_diagonal = 0.0;     ///< -1/(2 dx^2)
  double time = 0.0;

  std::size_t dimension() const noexcept { return diagonal.size(); }

  /// Infinity norm.
  double norm() const {
    double m = 0.0;
    for (double d : diagonal) m = std::max(m, std::abs(d));
    return m + 2.0 * std::abs(off_diagonal);
  }
};

/// `potential` holds V on every grid point, walls included.
inline HamiltonianMatrix hamiltonian_from_potential(const Grid& grid, std::span<const double> potential,
                                                    double t) {
  if (potential.size() != grid.size()) throw GridMismatchError("hamiltonian: potential size mismatch");
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  HamiltonianMatrix h{grid, std::vector<double>(grid.interior_size()), -0.5 * inv_dx2, t};
  for (std::size_t i = 0; i < h.diagonal.size(); ++i) h.diagonal[i] = inv_dx2 + potential[i + 1];
  return h;
}

inline HamiltonianMatrix build_hamiltonian(const PotentialSpec& spec, const Grid& grid, double t) {
  const auto v = evaluate(spec, grid, t);
  return hamiltonian_from_potential(grid, v, t);
}

namespace detail {

/// Number of eigenvalues of the tridiagonal matrix strictly below `lambda`.
inline std::size_t sturm_count(std::span<const double> d, double e, double lambda, double pivmin) {
  const double e2 = e * e;
  std::size_t count = 0;
  double q = d[0] - lambda;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = d[i] - lambda - e2 / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

/// LU factorization with partial pivoting of (T - shift I), T tridiagonal with
/// constant off-diagonal. Mirrors LAPACK dgttrf: U has two superdiagonals.
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(std::span<const double> d, double e, double shift, double tiny) {
    const std::size_t n = d.size();
    dl_.assign(n, e);
    du_.assign(n, e);
    du2_.assign(n, 0.0);
    dd_.resize(n);
    swapped_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) dd_[i] = d[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(dd_[i]) >= std::abs(dl_[i])) {
        if (dd_[i] == 0.0) dd_[i] = tiny;
        const double factor = dl_[i] / dd_[i];
        dl_[i] = factor;
        dd_[i + 1] -= factor * du_[i];
      } else {
        const double factor = dd_[i] / dl_[i];
        dd_[i] = dl_[i];
        dl_[i] = factor;
        const double temp = du_[i];
        du_[i] = dd_[i + 1];
        dd_[i + 1] = temp - factor * dd_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -factor * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    if (dd_[n - 1] == 0.0) dd_[n - 1] = tiny;
    for (auto& v : dd_)
      if (std::abs(v) < tiny) v = std::copysign(tiny, v);
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = dd_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped_[i]) {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i + 1];
      } else {
        b[i + 1] -= dl_[i] * b[i];
      }
    }
    b[n - 1] /= dd_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / dd_[n - 2];
    for (std::size_t k = n - 2; k-- > 0;)
      b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / dd_[k];
  }

 private:
  std::vector<double> dl_, dd_, du_, du2_;
  std::vector<bool> swapped_;
};

inline double euclid_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Sign convention: the first local extremum of |v| with appreciable
/// magnitude is made positive.
inline void fix_gauge(std::vector<double>& v) {
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  const double floor = 1e-3 * vmax;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(v[i]);
    if (a < floor) continue;
    const double left = i > 0 ? std::abs(v[i - 1]) : 0.0;
    const double right = i + 1 < n ? std::abs(v[i + 1]) : 0.0;
    if (a >= left && a >= right) {
      if (v[i] < 0.0)
        for (auto& x : v) x = -x;
      return;
    }
  }
}

}  // namespace detail

/// The `k` lowest eigenpairs, energies ascending, states normalized on the grid.
inline EigenSolution lowest_eigenpairs(const HamiltonianMatrix& h, std::size_t k) {
  const std::size_t n = h.dimension();
  if (k < 1 || k > n) throw std::invalid_argument("lowest_eigenpairs: k out of range");
  const auto d = std::span<const double>(h.diagonal);
  const double e = h.off_diagonal;
  const double hnorm = h.norm();
  const double eps = std::numeric_limits<double>::epsilon();
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, e * e);

  double lower = std::numeric_limits<double>::max();
  double upper = std::numeric_limits<double>::lowest();
  for (double di : d) {
    lower = std::min(lower, di - 2.0 * std::abs(e));
    upper = std::max(upper, di + 2.0 * std::abs(e));
  }

  constexpr int kMaxBisection = 256;
  std::vector<double> energies(k);
  for (std::size_t j = 0; j < k; ++j) {
    double lo = j > 0 ? energies[j - 1] : lower;
    double hi = upper;
    int iter = 0;
    for (; iter < kMaxBisection; ++iter) {
      const double tol = 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + pivmin;
      if (hi - lo <= tol) break;
      const double mid = 0.5 * (lo + hi);
      if (detail::sturm_count(d, e, mid, pivmin) > j)
        hi = mid;
      else
        lo = mid;
    }
    if (iter == kMaxBisection)
      throw ConvergenceError(fmt::format(
          "lowest_eigenpairs: bisection for level {} stalled after {} iterations, bracket [{:.17g}, {:.17g}]",
          j, iter, lo, hi));
    energies[j] = 0.5 * (lo + hi);
  }

  const Grid& grid = h.grid;
  const double tiny = eps * hnorm;
  const double ortho_window = 1e-3 * hnorm;
  std::vector<std::vector<double>> vectors;
  vectors.reserve(k);
  Xoshiro256StarStar start_rng(0x5eedULL);
  std::vector<double> start(n);
  for (auto& s : start) s = start_rng.uniform(-1.0, 1.0);

  constexpr int kMaxInverse = 8;
  for (std::size_t j = 0; j < k; ++j) {
    const detail::ShiftedTridiagonalLU lu(d, e, energies[j], tiny);
    std::vector<double> v = start;
    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < kMaxInverse; ++iter) {
      for (std::size_t i = 0; i < j; ++i) {
        if (std::abs(energies[j] - energies[i]) > ortho_window) continue;
        double dot = 0.0;
        for (std::size_t p = 0; p < n; ++p) dot += vectors[i][p] * v[p];
        for (std::size_t p = 0; p < n; ++p) v[p] -= dot * vectors[i][p];
      }
      const double scale = detail::euclid_norm(v);
      for (auto& x : v) x /= scale;
      lu.solve(v);
      const double vnorm = detail::euclid_norm(v);
      for (auto& x : v) x /= vnorm;

      double r2 = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        double hv = d[p] * v[p];
        if (p > 0) hv += e * v[p - 1];
        if (p + 1 < n) hv += e * v[p + 1];
        const double r = hv - energies[j] * v[p];
        r2 += r * r;
      }
      residual = std::sqrt(r2);
      if (iter >= 1 && residual <= 1e-10 * hnorm) break;
    }
    if (!(residual <= 1e-8 * hnorm))
      throw ConvergenceError(fmt::format(
          "lowest_eigenpairs: inverse iteration for level {} (E = {:.17g}) left residual {:.3e} after {} "
          "iterations (limit {:.3e})",
          j, energies[j], residual, iter, 1e-8 * hnorm));
    // One final projection keeps near-degenerate vectors orthogonal.
    for (std::size_t i = 0; i < j; ++i) {
      if (std::abs(energies[j] - energies[i]) > ortho_window) continue;
      double dot = 0.0;
      for (std::size_t p = 0; p < n; ++p) dot += vectors[i][p] * v[p];
      for (std::size_t p = 0; p < n; ++p) v[p] -= dot * vectors[i][p];
      const double vn = detail::euclid_norm(v);
      for (auto& x : v) x /= vn;
    }
    detail::fix_gauge(v);
    vectors.push_back(std::move(v));
  }

  EigenSolution sol;
  sol.energies = energies;
  const double amplitude_scale = 1.0 / std::sqrt(grid.dx());
  for (const auto& v : vectors) {
    std::vector<cplx> amps(grid.size());
    for (std::size_t p = 0; p < n; ++p) amps[p + 1] = v[p] * amplitude_scale;
    sol.states.push_back(WavefunctionState::from_samples(grid, std::move(amps), h.time));
  }
  for (std::size_t j = 0; j + 1 < k; ++j)
    if (std::abs(energies[j + 1] - energies[j]) < kDegeneracyThreshold) sol.degenerate_pairs.push_back(j);
  return sol;
}

/// <psi_m| x |psi_n> by the trapezoid rule (real for real eigenstates).
inline double dipole_element(const EigenSolution& sol, std::size_t m, std::size_t n) {
  if (m >= sol.states.size() || n >= sol.states.size())
    throw std::out_of_range("dipole_element: level index out of range");
  const auto& a = sol.states[m];
  const auto& b = sol.states[n];
  const Grid& grid = a.grid();
  require_same_grid(grid, b.grid(), "dipole_element");
  cplx sum{};
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
    sum += std::conj(a.amplitudes()[i]) * grid.x(i) * b.amplitudes()[i];
  return (sum * grid.dx()).real();
}

}  // namespace adiabat
