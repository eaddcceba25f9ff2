#pragma once

// Adiabaticity diagnostics: the perturbative criterion epsilon(t), ramp-rate
// calibration, the six-distance trajectory behind the three metric graphs,
// and the audits run over it.
//
// Graph (a): d_n_0t  vs d_psi_0t   (adiabatic line d_n = slope * d_psi)
// Graph (b): d_n_gst vs d_psi_gst  (adiabatic point: the origin)
// Graph (c): d_*_0t  vs d_*_0gs    (adiabatic line y = x)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "adiabat/eigensolver.hpp"
#include "adiabat/field_io.hpp"
#include "adiabat/metrics.hpp"
#include "adiabat/propagator.hpp"

namespace adiabat {

inline constexpr double kDefaultLineSlope = 1.5;
inline constexpr double kDefaultOccupancyMargin = 0.05;
inline constexpr double kTriangleSlack = 1e-10;

struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// epsilon = p |<m|x|n>| / (E_n - E_m)^2, the field ramp giving dH/dt = -p x.
inline double qac_epsilon(const EigenSolution& sol, double ramp_rate, std::size_t m = 1, std::size_t n = 0) {
  if (m >= sol.energies.size() || n >= sol.energies.size())
    throw std::out_of_range("qac_epsilon: level index out of range");
  const double gap = sol.energies[n] - sol.energies[m];
  if (sol.is_degenerate(m, n) || std::abs(gap) <= kDegeneracyThreshold)
    throw DegeneracyError(fmt::format("qac_epsilon: levels {} and {} are degenerate (gap {:.3e})", m, n, gap));
  return std::abs(ramp_rate) * std::abs(dipole_element(sol, m, n)) / (gap * gap);
}

/// Ramp rate p for which epsilon(0) = epsilon0, levels (m, n) = (1, 0).
inline double calibrate_rate(const PotentialSpec& spec, const Grid& grid, double epsilon0) {
  if (!(epsilon0 > 0.0)) throw std::invalid_argument("calibrate_rate: epsilon0 must be > 0");
  const auto sol = lowest_eigenpairs(build_hamiltonian(spec.with_ramp(0.0), grid, 0.0), 2);
  const double gap = sol.energies[1] - sol.energies[0];
  if (sol.is_degenerate(0, 1) || std::abs(gap) <= kDegeneracyThreshold)
    throw DegeneracyError(fmt::format("calibrate_rate: lowest pair is degenerate (gap {:.3e})", gap));
  const double dipole = std::abs(dipole_element(sol, 1, 0));
  if (dipole < 1e-12)
    throw std::domain_error(
        fmt::format("calibrate_rate: |<1|x|0>| = {:.3e}; the transition is forbidden and the criterion "
                    "does not apply",
                    dipole));
  // Rate for epsilon0 = 1 first, so rates for different targets share one factor.
  const double unit_rate = gap * gap / dipole;
  return epsilon0 * unit_rate;
}

struct TrajectoryRecord {
  double t = 0.0;
  double d_psi_0t = 0.0, d_n_0t = 0.0;    ///< initial GS <-> dynamic state
  double d_psi_gst = 0.0, d_n_gst = 0.0;  ///< instantaneous GS <-> dynamic state
  double d_psi_0gs = 0.0, d_n_0gs = 0.0;  ///< initial GS <-> instantaneous GS
  double epsilon = 0.0;
  double e0 = 0.0, e1 = 0.0;
  double norm = 1.0;
};

/// One record per output time. `dynamic[i]` and `track.solutions[i]` must
/// refer to the same time; the initial GS is the t = 0 entry of the track.
inline std::vector<TrajectoryRecord> build_trajectory(std::span<const WavefunctionState> dynamic,
                                                      const EigenTrack& track, double ramp_rate) {
  if (dynamic.size() != track.solutions.size() || dynamic.size() != track.times.size())
    throw std::invalid_argument(fmt::format("build_trajectory: {} dynamic states but {} ground states",
                                            dynamic.size(), track.solutions.size()));
  if (dynamic.empty()) return {};
  const auto& psi0 = track.solutions.front().states.front();
  const auto n0 = density_of(psi0);

  std::vector<TrajectoryRecord> records;
  records.reserve(dynamic.size());
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    const auto& psi = dynamic[i];
    const auto& sol = track.solutions[i];
    if (std::abs(psi.time() - track.times[i]) > 1e-9)
      throw std::invalid_argument(fmt::format("build_trajectory: time mismatch at record {} ({} vs {})", i,
                                              psi.time(), track.times[i]));
    const auto& gs = sol.states.front();
    const auto n_t = density_of(psi);
    const auto n_gs = density_of(gs);

    TrajectoryRecord r;
    r.t = psi.time();
    r.d_psi_0t = wavefunction_distance(psi0, psi);
    r.d_n_0t = density_distance(n0, n_t);
    r.d_psi_gst = wavefunction_distance(gs, psi);
    r.d_n_gst = density_distance(n_gs, n_t);
    r.d_psi_0gs = wavefunction_distance(psi0, gs);
    r.d_n_0gs = density_distance(n0, n_gs);
    r.e0 = sol.energies.at(0);
    r.e1 = sol.energies.size() > 1 ? sol.energies[1] : std::numeric_limits<double>::quiet_NaN();
    try {
      r.epsilon = sol.energies.size() > 1 ? qac_epsilon(sol, ramp_rate) : std::numeric_limits<double>::quiet_NaN();
    } catch (const DegeneracyError&) {
      r.epsilon = std::numeric_limits<double>::quiet_NaN();
    }
    r.norm = psi.norm();
    records.push_back(r);
  }
  return records;
}

/// 100 * D_psi(psi_GS(t), psi(t)) / sqrt(N), capped at 100.
inline double degree_of_adiabaticity(const TrajectoryRecord& r, int particles = 1) {
  return std::min(100.0, 100.0 * r.d_psi_gst / std::sqrt(static_cast<double>(particles)));
}

namespace detail {

struct Peak {
  std::size_t index;
  double prominence;
};

/// Local maxima with their topographic prominence.
inline std::vector<Peak> find_peaks(std::span<const double> v) {
  std::vector<Peak> peaks;
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    double left_min = v[i];
    for (std::size_t j = i; j-- > 0;) {
      if (v[j] > v[i]) break;
      left_min = std::min(left_min, v[j]);
    }
    double right_min = v[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (v[j] > v[i]) break;
      right_min = std::min(right_min, v[j]);
    }
    peaks.push_back({i, v[i] - std::max(left_min, right_min)});
  }
  return peaks;
}

/// Peaks whose prominence is at least `fraction` of the series range.
inline std::vector<std::size_t> prominent_peaks(std::span<const double> v, double fraction) {
  if (v.size() < 3) return {};
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double threshold = fraction * (*hi - *lo);
  std::vector<std::size_t> out;
  if (!(threshold > 0.0)) return out;
  for (const auto& p : find_peaks(v))
    if (p.prominence >= threshold) out.push_back(p.index);
  return out;
}

/// Sub-sample peak time from a parabola through three samples.
inline double refine_peak(std::span<const double> t, std::span<const double> v, std::size_t i) {
  const double denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
  if (denom == 0.0) return t[i];
  const double shift = 0.5 * (v[i - 1] - v[i + 1]) / denom;
  return t[i] + shift * 0.5 * (t[i + 1] - t[i - 1]);
}

}  // namespace detail

/// Minimum prominence of an arch maximum, relative to the series range.
inline constexpr double kArchProminence = 0.1;

/// Mean spacing of the arch maxima of a distance series.
///
/// The ramp-up phase ends at the first prominent maximum. The remainder is
/// linearly detrended and its prominent maxima located; fewer than three
/// maxima means no period.
inline std::optional<double> arch_period(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw std::invalid_argument("arch_period: series length mismatch");
  const auto first = detail::prominent_peaks(values, kArchProminence);
  if (first.empty()) return std::nullopt;
  const std::size_t start = first.front();

  const auto tail_t = times.subspan(start);
  std::vector<double> tail(values.begin() + static_cast<std::ptrdiff_t>(start), values.end());
  if (tail.size() < 3) return std::nullopt;
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    mt += tail_t[i];
    mv += tail[i];
  }
  mt /= static_cast<double>(tail.size());
  mv /= static_cast<double>(tail.size());
  double stt = 0.0, stv = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    stt += (tail_t[i] - mt) * (tail_t[i] - mt);
    stv += (tail_t[i] - mt) * (tail[i] - mv);
  }
  const double trend = stt > 0.0 ? stv / stt : 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) tail[i] -= trend * (tail_t[i] - mt);

  // The series starts at the ramp-up maximum, so it is a left edge and not
  // detectable as a local maximum; count it explicitly.
  auto peaks = detail::prominent_peaks(tail, kArchProminence);
  std::vector<double> peak_times{tail_t.front()};
  for (std::size_t i : peaks) peak_times.push_back(detail::refine_peak(tail_t, tail, i));
  if (peak_times.size() < 3) return std::nullopt;
  return (peak_times.back() - peak_times.front()) / static_cast<double>(peak_times.size() - 1);
}

/// Fraction of records with d_n_0t > slope * d_psi_0t + margin.
inline double occupancy_above_line(std::span<const TrajectoryRecord> records, double slope, double margin) {
  if (!(slope > 0.0)) throw std::invalid_argument("occupancy_above_line: slope must be > 0");
  if (!(margin >= 0.0)) throw std::invalid_argument("occupancy_above_line: margin must be >= 0");
  if (records.empty()) return 0.0;
  std::size_t above = 0;
  for (const auto& r : records)
    if (r.d_n_0t > slope * r.d_psi_0t + margin) ++above;
  return static_cast<double>(above) / static_cast<double>(records.size());
}

/// Records violating any form of the triangle inequality among the three
/// states (initial GS, instantaneous GS, dynamic), for either metric.
inline std::size_t triangle_violations(std::span<const TrajectoryRecord> records, double slack = kTriangleSlack) {
  const auto broken = [slack](double ab, double bc, double ac) {
    return ab > bc + ac + slack || bc > ab + ac + slack || ac > ab + bc + slack;
  };
  std::size_t count = 0;
  for (const auto& r : records)
    if (broken(r.d_psi_0t, r.d_psi_gst, r.d_psi_0gs) || broken(r.d_n_0t, r.d_n_gst, r.d_n_0gs)) ++count;
  return count;
}

/// Largest |d_n_0t - slope * d_psi_0t| over the trajectory.
inline double max_line_deviation(std::span<const TrajectoryRecord> records, double slope) {
  double worst = 0.0;
  for (const auto& r : records) worst = std::max(worst, std::abs(r.d_n_0t - slope * r.d_psi_0t));
  return worst;
}

struct AdiabaticityReport {
  double max_degree_percent = 0.0;
  double mean_degree_percent = 0.0;
  std::optional<double> arch_period_psi;
  std::optional<double> arch_period_n;
  double above_line_fraction = 0.0;
  double slope_used = kDefaultLineSlope;
  double margin_used = kDefaultOccupancyMargin;
  double max_line_deviation = 0.0;
  std::size_t triangle_violations = 0;
  double max_d_psi_gst = 0.0;
};

inline AdiabaticityReport analyze_trajectory(std::span<const TrajectoryRecord> records,
                                             double slope = kDefaultLineSlope,
                                             double margin = kDefaultOccupancyMargin) {
  AdiabaticityReport rep;
  rep.slope_used = slope;
  rep.margin_used = margin;
  if (records.empty()) return rep;
  std::vector<double> t, psi, n;
  double sum = 0.0;
  for (const auto& r : records) {
    const double degree = degree_of_adiabaticity(r);
    rep.max_degree_percent = std::max(rep.max_degree_percent, degree);
    rep.max_d_psi_gst = std::max(rep.max_d_psi_gst, r.d_psi_gst);
    sum += degree;
    t.push_back(r.t);
    psi.push_back(r.d_psi_gst);
    n.push_back(r.d_n_gst);
  }
  rep.mean_degree_percent = sum / static_cast<double>(records.size());
  rep.arch_period_psi = arch_period(t, psi);
  rep.arch_period_n = arch_period(t, n);
  rep.above_line_fraction = occupancy_above_line(records, slope, margin);
  rep.max_line_deviation = max_line_deviation(records, slope);
  rep.triangle_violations = triangle_violations(records);
  return rep;
}

// --- serialization ------------------------------------------------------------

inline constexpr const char* kTrajectoryHeader =
    "t,d_psi_0t,d_n_0t,d_psi_gst,d_n_gst,d_psi_0gs,d_n_0gs,epsilon,e0,e1,norm";

inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryRecord> records) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : records) {
    os << format_double(r.t);
    for (double v : {r.d_psi_0t, r.d_n_0t, r.d_psi_gst, r.d_n_gst, r.d_psi_0gs, r.d_n_0gs, r.epsilon, r.e0,
                     r.e1, r.norm})
      os << ',' << format_double(v);
    os << '\n';
  }
}

inline std::vector<TrajectoryRecord> read_trajectory_csv(std::istream& is) {
  const auto table = read_field_csv(is);
  if (table.header.size() != 11 || table.header.front() != "t")
    throw FormatError("trajectory csv: unexpected header");
  std::vector<TrajectoryRecord> records(table.columns[0].size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    double* fields[] = {&r.t,       &r.d_psi_0t, &r.d_n_0t,  &r.d_psi_gst, &r.d_n_gst, &r.d_psi_0gs,
                        &r.d_n_0gs, &r.epsilon,  &r.e0,      &r.e1,        &r.norm};
    for (std::size_t c = 0; c < 11; ++c) *fields[c] = table.columns[c][i];
  }
  return records;
}

inline std::string optional_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("absent");
}

/// Key-value report. The degree is reported against the sqrt(N) maximum;
/// the orthogonal-state bound sqrt(2N) is given alongside for comparison.
inline void write_report(std::ostream& os, const AdiabaticityReport& rep) {
  os << "max_degree_percent = " << format_double(rep.max_degree_percent) << '\n';
  os << "mean_degree_percent = " << format_double(rep.mean_degree_percent) << '\n';
  os << "max_degree_percent_of_sqrt2N = " << format_double(100.0 * rep.max_d_psi_gst / std::sqrt(2.0)) << '\n';
  os << "arch_period_psi = " << optional_text(rep.arch_period_psi) << '\n';
  os << "arch_period_n = " << optional_text(rep.arch_period_n) << '\n';
  os << "above_line_fraction = " << format_double(rep.above_line_fraction) << '\n';
  os << "slope_used = " << format_double(rep.slope_used) << '\n';
  os << "margin_used = " << format_double(rep.margin_used) << '\n';
  os << "max_line_deviation = " << format_double(rep.max_line_deviation) << '\n';
  os << "triangle_violations = " << rep.triangle_violations << '\n';
}

inline constexpr const char* kReportCsvHeader =
    "max_degree_percent,mean_degree_percent,arch_period_psi,arch_period_n,above_line_fraction,slope_used,"
    "margin_used,max_line_deviation,triangle_violations";

inline std::string report_csv_row(const AdiabaticityReport& rep) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", format_double(rep.max_degree_percent),
                     format_double(rep.mean_degree_percent), optional_text(rep.arch_period_psi),
                     optional_text(rep.arch_period_n), format_double(rep.above_line_fraction),
                     format_double(rep.slope_used), format_double(rep.margin_used),
                     format_double(rep.max_line_deviation), rep.triangle_violations);
}

}  // namespace adiabat
