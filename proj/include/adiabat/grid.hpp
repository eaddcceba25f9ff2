#pragma once

// Uniform 1D grid with hard walls, and the field types that live on it.
//
// All integrals use the trapezoid rule. Wavefunctions vanish on both walls,
// so the trapezoid sum reduces to dx * sum over interior points.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace adiabat {

using cplx = std::complex<double>;

inline constexpr double kNormTolerance = 1e-10;

/// Thrown when two fields defined on different grids are combined.
struct GridMismatchError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Thrown when a field violates its normalization invariant.
struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points)
      : x_min_(x_min), x_max_(x_max), n_points_(n_points) {
    if (!(x_min < x_max)) throw std::invalid_argument("Grid: x_min must be < x_max");
    if (n_points < 3) throw std::invalid_argument("Grid: n_points must be >= 3");
    dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
  }

  /// Symmetric box [-half_width, +half_width].
  static Grid centered(double half_width = 15.0, std::size_t n_points = 1201) {
    return Grid(-half_width, half_width, n_points);
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  std::size_t size() const noexcept { return n_points_; }
  std::size_t interior_size() const noexcept { return n_points_ - 2; }

  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }

  std::vector<double> points() const {
    std::vector<double> xs(n_points_);
    for (std::size_t i = 0; i < n_points_; ++i) xs[i] = x(i);
    return xs;
  }

  bool operator==(const Grid&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double dx_ = 0.0;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw GridMismatchError(fmt::format("{}: fields live on different grids", where));
}

template <class T>
T trapezoid(const Grid& grid, std::span<const T> values) {
  if (values.size() != grid.size()) throw GridMismatchError("trapezoid: size does not match grid");
  T sum{};
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  sum += (values.front() + values.back()) * 0.5;
  return sum * grid.dx();
}

inline double trapezoid_norm(const Grid& grid, std::span<const cplx> amplitudes) {
  if (amplitudes.size() != grid.size()) throw GridMismatchError("norm: size does not match grid");
  double sum = 0.5 * (std::norm(amplitudes.front()) + std::norm(amplitudes.back()));
  for (std::size_t i = 1; i + 1 < amplitudes.size(); ++i) sum += std::norm(amplitudes[i]);
  return sum * grid.dx();
}

/// Single-particle wavefunction normalized to one, zero on both walls.
class WavefunctionState {
 public:
  WavefunctionState(Grid grid, std::vector<cplx> amplitudes, double time = 0.0,
                    double norm_tolerance = kNormTolerance)
      : grid_(grid), amplitudes_(std::move(amplitudes)), time_(time) {
    if (amplitudes_.size() != grid_.size())
      throw GridMismatchError("WavefunctionState: amplitude count does not match grid");
    if (amplitudes_.front() != cplx{} || amplitudes_.back() != cplx{})
      throw NormalizationError("WavefunctionState: amplitudes must vanish at the walls");
    const double norm = trapezoid_norm(grid_, amplitudes_);
    if (!(std::abs(norm - 1.0) <= norm_tolerance))
      throw NormalizationError(fmt::format("WavefunctionState: norm {:.17g} deviates from 1", norm));
  }

  /// Zeroes the wall values and rescales the samples to unit norm.
  static WavefunctionState from_samples(Grid grid, std::vector<cplx> samples, double time = 0.0) {
    if (samples.size() != grid.size())
      throw GridMismatchError("from_samples: sample count does not match grid");
    samples.front() = samples.back() = cplx{};
    const double norm = trapezoid_norm(grid, samples);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NormalizationError("from_samples: samples have zero or non-finite norm");
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& a : samples) a *= scale;
    return WavefunctionState(grid, std::move(samples), time);
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  double time() const noexcept { return time_; }
  double norm() const { return trapezoid_norm(grid_, amplitudes_); }

  WavefunctionState with_phase(double theta) const {
    const cplx phase = std::polar(1.0, theta);
    auto rotated = amplitudes_;
    for (auto& a : rotated) a *= phase;
    return WavefunctionState(grid_, std::move(rotated), time_);
  }

 private:
  Grid grid_;
  std::vector<cplx> amplitudes_;
  double time_;
};

/// Nonnegative particle density integrating to one.
class DensityProfile {
 public:
  DensityProfile(Grid grid, std::vector<double> values, double norm_tolerance = kNormTolerance)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw GridMismatchError("DensityProfile: value count does not match grid");
    for (double v : values_)
      if (!(v >= 0.0)) throw NormalizationError("DensityProfile: negative or NaN value");
    const double total = trapezoid<double>(grid_, values_);
    if (!(std::abs(total - 1.0) <= norm_tolerance))
      throw NormalizationError(fmt::format("DensityProfile: integral {:.17g} deviates from 1", total));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Lowest eigenpairs of a discretized Hamiltonian, energies ascending.
struct EigenSolution {
  std::vector<double> energies;
  std::vector<WavefunctionState> states;
  /// Indices i with |E_{i+1} - E_i| below the degeneracy threshold.
  std::vector<std::size_t> degenerate_pairs;

  bool is_degenerate(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    for (std::size_t k : degenerate_pairs)
      if (k >= i && k < j) return true;
    return false;
  }
};

inline DensityProfile density_of(const WavefunctionState& psi) {
  std::vector<double> values(psi.amplitudes().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::norm(psi.amplitudes()[i]);
  // The wavefunction passed its own norm check; the density inherits it.
  const double tolerance = std::max(kNormTolerance, 2.0 * std::abs(psi.norm() - 1.0));
  return DensityProfile(psi.grid(), std::move(values), tolerance);
}

/// Trapezoid-rule overlap <psi1|psi2> = integral of conj(psi1) * psi2.
inline cplx inner_product(const WavefunctionState& psi1, const WavefunctionState& psi2) {
  require_same_grid(psi1.grid(), psi2.grid(), "inner_product");
  const auto a = psi1.amplitudes();
  const auto b = psi2.amplitudes();
  cplx sum = 0.5 * (std::conj(a.front()) * b.front() + std::conj(a.back()) * b.back());
  for (std::size_t i = 1; i + 1 < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * psi1.grid().dx();
}

}  // namespace adiabat
