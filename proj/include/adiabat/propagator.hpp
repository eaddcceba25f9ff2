#pragma once

// Crank-Nicolson propagation under H(t) = -1/2 d^2/dx^2 + V(x) - p t x.
// Each step solves (1 + i dt/2 H(t + dt/2)) psi' = (1 - i dt/2 H(t + dt/2)) psi
// on the interior points; the walls stay at zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "adiabat/eigensolver.hpp"
#include "adiabat/grid.hpp"
#include "adiabat/potentials.hpp"

namespace adiabat {

inline constexpr double kMaxTimeStep = 0.01;
inline constexpr double kNormAbortTolerance = 1e-8;

struct PropagationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvolutionConfig {
  PotentialSpec spec;
  Grid grid;
  WavefunctionState initial;
  double dt = 1e-3;
  double t_max = 100.0;
  std::size_t output_stride = 100;

  void validate() const {
    if (!(dt > 0.0 && dt <= kMaxTimeStep))
      throw std::invalid_argument(fmt::format("evolution: dt = {} outside (0, {}]", dt, kMaxTimeStep));
    if (!(t_max > 0.0)) throw std::invalid_argument("evolution: t_max must be > 0");
    if (output_stride < 1) throw std::invalid_argument("evolution: output_stride must be >= 1");
    require_same_grid(grid, initial.grid(), "evolution initial state");
    ::adiabat::validate(spec);
  }

  std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_max / dt)); }
};

/// Reusable Crank-Nicolson stepper for one potential on one grid.
class CrankNicolson {
 public:
  CrankNicolson(const PotentialSpec& spec, const Grid& grid)
      : grid_(grid), ramp_rate_(spec.ramp_rate) {
    const auto v = evaluate_static(spec, grid);
    const std::size_t n = grid.interior_size();
    kinetic_diag_ = 1.0 / (grid.dx() * grid.dx());
    off_ = -0.5 * kinetic_diag_;
    static_.resize(n);
    x_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      static_[i] = v[i + 1];
      x_[i] = grid.x(i + 1);
    }
    w_inv_.resize(n);
    g_.resize(n);
    rhs_.resize(n);
  }

  /// Advances the full-grid amplitude vector from t to t + dt. `dt` may be negative.
  void step(std::vector<cplx>& psi, double t, double dt) {
    const std::size_t n = static_.size();
    const double t_mid = t + 0.5 * dt;
    const double pt = ramp_rate_ * t_mid;
    const double half = 0.5 * dt;
    const cplx c{0.0, half * off_};  // off-diagonal of (1 + i dt/2 H)

    // rhs = (1 - i dt/2 H) psi
    for (std::size_t i = 0; i < n; ++i) {
      const double hdiag = kinetic_diag_ + static_[i] - pt * x_[i];
      const cplx centre = psi[i + 1];
      const cplx neighbours = psi[i] + psi[i + 2];
      rhs_[i] = centre - cplx{0.0, half} * (hdiag * centre + off_ * neighbours);
    }
    // Thomas sweep for the constant off-diagonal system.
    for (std::size_t i = 0; i < n; ++i) {
      const double hdiag = kinetic_diag_ + static_[i] - pt * x_[i];
      cplx w{1.0, half * hdiag};
      cplx r = rhs_[i];
      if (i > 0) {
        const cplx m = c * w_inv_[i - 1];
        w -= c * m;
        r -= c * g_[i - 1];
      }
      w_inv_[i] = reciprocal(w);
      g_[i] = r * w_inv_[i];
    }
    psi[n] = g_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) psi[i + 1] = g_[i] - c * w_inv_[i] * psi[i + 2];
    psi.front() = psi.back() = cplx{};
  }

  const Grid& grid() const noexcept { return grid_; }

 private:
  static cplx reciprocal(cplx z) noexcept {
    const double inv = 1.0 / (z.real() * z.real() + z.imag() * z.imag());
    return {z.real() * inv, -z.imag() * inv};
  }

  Grid grid_;
  double ramp_rate_;
  double kinetic_diag_ = 0.0;
  double off_ = 0.0;
  std::vector<double> static_, x_;
  std::vector<cplx> w_inv_, g_, rhs_;
};

struct EvolutionResult {
  WavefunctionState final_state;
  double max_norm_deviation = 0.0;
  std::size_t steps = 0;
};

using StateSink = std::function<void(const WavefunctionState&)>;

/// Runs t = 0 .. t_max and hands the state to `sink` at every multiple of
/// output_stride steps, t = 0 included.
inline EvolutionResult evolve(const EvolutionConfig& config, const StateSink& sink) {
  config.validate();
  const Grid& grid = config.grid;
  const std::size_t steps = config.step_count();
  CrankNicolson stepper(config.spec, grid);
  std::vector<cplx> psi(config.initial.amplitudes().begin(), config.initial.amplitudes().end());

  double max_dev = std::abs(trapezoid_norm(grid, psi) - 1.0);
  if (sink) sink(WavefunctionState(grid, psi, 0.0, kNormAbortTolerance));
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * config.dt;
    stepper.step(psi, t, config.dt);
    const double dev = std::abs(trapezoid_norm(grid, psi) - 1.0);
    max_dev = std::max(max_dev, dev);
    if (!(dev <= kNormAbortTolerance))
      throw PropagationError(fmt::format(
          "evolve: norm drifted by {:.3e} at step {} (t = {}); reduce dt (= {}) or refine the grid (dx = {})",
          dev, s + 1, static_cast<double>(s + 1) * config.dt, config.dt, grid.dx()));
    if (sink && (s + 1) % config.output_stride == 0)
      sink(WavefunctionState(grid, psi, static_cast<double>(s + 1) * config.dt, kNormAbortTolerance));
  }
  const double t_end = static_cast<double>(steps) * config.dt;
  return {WavefunctionState(grid, std::move(psi), t_end, kNormAbortTolerance), max_dev, steps};
}

/// Output times of `evolve` for this configuration.
inline std::vector<double> output_times(const EvolutionConfig& config) {
  std::vector<double> times;
  const std::size_t steps = config.step_count();
  for (std::size_t s = 0; s <= steps; s += config.output_stride)
    times.push_back(static_cast<double>(s) * config.dt);
  return times;
}

/// Instantaneous eigenpairs along a list of times.
struct EigenTrack {
  std::vector<double> times;
  std::vector<EigenSolution> solutions;
  /// Times at which the potential minimum sits on the wall-adjacent point.
  std::vector<double> wall_contact_times;
};

inline EigenTrack instantaneous_eigen_track(const PotentialSpec& spec, const Grid& grid,
                                            std::span<const double> times, std::size_t levels = 2) {
  EigenTrack track;
  track.times.assign(times.begin(), times.end());
  track.solutions.reserve(times.size());
  const auto v_static = evaluate_static(spec, grid);
  std::vector<double> v(v_static.size());
  for (double t : times) {
    const double pt = spec.ramp_rate * t;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = v_static[i] - pt * grid.x(i);
    const auto lowest = std::min_element(v.begin() + 1, v.end() - 1) - v.begin();
    if (lowest == 1 || static_cast<std::size_t>(lowest) == grid.size() - 2)
      track.wall_contact_times.push_back(t);
    track.solutions.push_back(lowest_eigenpairs(hamiltonian_from_potential(grid, v, t), levels));
  }
  return track;
}

/// Ground state of H(t) at each requested time.
inline std::vector<WavefunctionState> instantaneous_gs_track(const EvolutionConfig& config,
                                                             std::span<const double> times) {
  for (double t : times)
    if (t < 0.0 || t > config.t_max + 0.5 * config.dt)
      throw std::invalid_argument(fmt::format("instantaneous_gs_track: t = {} outside [0, t_max]", t));
  const auto track = instantaneous_eigen_track(config.spec, config.grid, times, 1);
  std::vector<WavefunctionState> states;
  states.reserve(times.size());
  for (const auto& sol : track.solutions) states.push_back(sol.states.front());
  return states;
}

}  // namespace adiabat
