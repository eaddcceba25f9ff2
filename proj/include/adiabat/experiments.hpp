#pragma once

// Pipelines behind the command-line tool: ground-state metric studies,
// single ramped evolutions with their adiabaticity report, parameter sweeps,
// and rate calibration. Each writes CSV (and optionally SVG) into a directory.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "adiabat/adiabaticity.hpp"
#include "adiabat/config.hpp"
#include "adiabat/eigensolver.hpp"
#include "adiabat/field_io.hpp"
#include "adiabat/metrics.hpp"
#include "adiabat/potentials.hpp"
#include "adiabat/propagator.hpp"
#include "adiabat/rng.hpp"
#include "adiabat/svg.hpp"

namespace adiabat {

// --- ground-state studies -----------------------------------------------------

struct GsPair {
  std::string id;
  MetricPair metrics;
  double nu = std::numeric_limits<double>::quiet_NaN();  ///< SHO mode only
};

struct GsStudyResult {
  std::vector<GsPair> pairs;
  SlopeFit fit;
  bool sho_mode = false;
};

inline std::vector<double> sho_family_frequencies(double omega_min, double omega_max, std::size_t count,
                                                  bool log_spacing = true) {
  if (count < 1) throw std::invalid_argument("sho family: count must be >= 1");
  if (!(omega_min > 0.0 && omega_max >= omega_min)) throw std::invalid_argument("sho family: bad frequency range");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = log_spacing ? omega_min * std::pow(omega_max / omega_min, f) : omega_min + f * (omega_max - omega_min);
  }
  out.back() = omega_max;
  return out;
}

/// Seeds of a random family: successive splitmix64 outputs of the family seed.
inline std::vector<std::uint64_t> family_seeds(std::uint64_t family_seed, std::size_t count) {
  SplitMix64 sm(family_seed);
  std::vector<std::uint64_t> seeds(count);
  for (auto& s : seeds) s = sm.next();
  return seeds;
}

inline WavefunctionState ground_state(const PotentialSpec& spec, const Grid& grid) {
  return lowest_eigenpairs(build_hamiltonian(spec.with_ramp(0.0), grid, 0.0), 1).states.front();
}

/// Every oscillator in `omegas` against the reference oscillator.
inline GsStudyResult sho_gs_study(const Grid& grid, std::span<const double> omegas, double reference_omega) {
  if (omegas.empty()) throw std::invalid_argument("gs-study: need >= 2 systems (reference plus one)");
  const auto ref = ground_state(PotentialSpec{HarmonicWell{reference_omega}}, grid);
  GsStudyResult result;
  result.sho_mode = true;
  std::vector<MetricPair> points;
  for (double w : omegas) {
    const auto gs = ground_state(PotentialSpec{HarmonicWell{w}}, grid);
    GsPair pair{fmt::format("omega={}|ref={}", format_double(w), format_double(reference_omega)),
                metric_pair(ref, gs), w / reference_omega};
    points.push_back(pair.metrics);
    result.pairs.push_back(std::move(pair));
  }
  result.fit = fit_slope_through_origin(points);
  return result;
}

/// All unordered pairs of a family of ground states.
inline GsStudyResult pairwise_gs_study(const Grid& grid, std::span<const PotentialSpec> family,
                                       std::span<const std::string> labels) {
  if (family.size() < 2) throw std::invalid_argument("gs-study: need >= 2 systems");
  std::vector<WavefunctionState> states;
  for (const auto& spec : family) states.push_back(ground_state(spec, grid));
  GsStudyResult result;
  std::vector<MetricPair> points;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      GsPair pair{fmt::format("{}|{}", labels[i], labels[j]), metric_pair(states[i], states[j])};
      points.push_back(pair.metrics);
      result.pairs.push_back(std::move(pair));
    }
  result.fit = fit_slope_through_origin(points);
  return result;
}

inline std::vector<PotentialSpec> random_family(std::uint64_t family_seed, std::size_t count, double lambda,
                                                double half_width) {
  std::vector<PotentialSpec> out;
  for (auto s : family_seeds(family_seed, count)) out.push_back(generate_random(s, lambda, half_width));
  return out;
}

inline GsStudyResult random_gs_study(const Grid& grid, std::uint64_t family_seed, std::size_t count, double lambda,
                                     double half_width) {
  const auto family = random_family(family_seed, count, lambda, half_width);
  std::vector<std::string> labels;
  for (const auto& spec : family) labels.push_back(fmt::format("seed={}", *std::get<RandomFourier>(spec.shape).seed));
  return pairwise_gs_study(grid, family, labels);
}

// --- ramped evolution protocol ------------------------------------------------

struct ProtocolSettings {
  double dt = 1e-3;
  double t_max = 100.0;
  std::size_t output_stride = 100;
  double slope = kDefaultLineSlope;
  double margin = kDefaultOccupancyMargin;
};

struct ProtocolRun {
  PotentialSpec spec;  ///< with the calibrated ramp
  double epsilon0 = 0.0;
  double ramp_rate = 0.0;
  std::vector<TrajectoryRecord> records;
  AdiabaticityReport report;
  double max_norm_deviation = 0.0;
  std::vector<double> wall_contact_times;
};

/// Calibrates p for epsilon0, evolves the initial GS under the ramp, tracks
/// the instantaneous GS, and analyzes the trajectory.
inline ProtocolRun run_protocol(const PotentialSpec& base, const Grid& grid, double epsilon0,
                                const ProtocolSettings& settings, const StateSink& extra_sink = {}) {
  ProtocolRun run;
  run.epsilon0 = epsilon0;
  run.ramp_rate = calibrate_rate(base, grid, epsilon0);
  run.spec = base.with_ramp(run.ramp_rate);

  EvolutionConfig config{run.spec, grid, ground_state(base, grid), settings.dt, settings.t_max,
                         settings.output_stride};
  config.validate();
  std::vector<WavefunctionState> dynamic;
  const auto result = evolve(config, [&](const WavefunctionState& s) {
    dynamic.push_back(s);
    if (extra_sink) extra_sink(s);
  });
  run.max_norm_deviation = result.max_norm_deviation;

  const auto times = output_times(config);
  const auto track = instantaneous_eigen_track(run.spec, grid, times, 2);
  run.wall_contact_times = track.wall_contact_times;
  run.records = build_trajectory(dynamic, track, run.ramp_rate);
  run.report = analyze_trajectory(run.records, settings.slope, settings.margin);
  return run;
}

// --- file output --------------------------------------------------------------

struct Provenance {
  std::string command;
  std::string config_hash;
  std::string seed = "none";
  Grid grid = Grid::centered();
  std::optional<double> dt;

  std::string line() const {
    return fmt::format("# adiabat {} config_hash={} seed={} grid={}:{}:{} dt={}\n", command, config_hash, seed,
                       format_double(grid.x_min()), format_double(grid.x_max()), grid.size(),
                       dt ? format_double(*dt) : std::string("none"));
  }
};

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

inline void write_gs_study(const std::filesystem::path& dir, const GsStudyResult& study, const Provenance& prov,
                           bool svg) {
  {
    auto out = open_output(dir / "pairs.csv");
    out << prov.line();
    out << (study.sho_mode ? "pair_id,d_psi,d_n,nu,sho_ratio,gridded_ratio\n" : "pair_id,d_psi,d_n\n");
    for (const auto& p : study.pairs) {
      out << p.id << ',' << format_double(p.metrics.d_psi) << ',' << format_double(p.metrics.d_n);
      if (study.sho_mode)
        out << ',' << format_double(p.nu) << ',' << format_double(sho_ratio(p.nu)) << ','
            << format_double(p.metrics.d_n / p.metrics.d_psi);
      out << '\n';
    }
    out << fmt::format("# slope={} r_squared={} pairs={}\n", format_double(study.fit.slope),
                       format_double(study.fit.r_squared), study.pairs.size());
  }
  {
    auto out = open_output(dir / "summary.txt");
    out << prov.line();
    out << "slope = " << format_double(study.fit.slope) << '\n';
    out << "r_squared = " << format_double(study.fit.r_squared) << '\n';
    out << "pairs = " << study.pairs.size() << '\n';
  }
  if (svg) {
    SvgPlot plot("Ground-state metrics", "D_psi", "D_n");
    std::vector<MetricPair> sorted;
    for (const auto& p : study.pairs) sorted.push_back(p.metrics);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.d_psi < b.d_psi; });
    for (const auto& p : sorted) plot.add_marker(p.d_psi, p.d_n, "pair");
    plot.add_reference_line(study.fit.slope, fmt::format("fit slope {:.3f}", study.fit.slope));
    auto out = open_output(dir / "gs_metrics.svg");
    plot.render(out);
  }
}

struct EvolveOutputOptions {
  bool svg = false;
  bool frames = false;
  std::optional<double> t_ref;
};

inline std::string frame_name(double t) { return fmt::format("t_{:.4f}.csv", t); }

inline void write_protocol_run(const std::filesystem::path& dir, const ProtocolRun& run, const Provenance& prov,
                               const EvolveOutputOptions& opts) {
  {
    auto out = open_output(dir / "trajectory.csv");
    out << prov.line();
    out << fmt::format("# epsilon0={} ramp_rate={}\n", format_double(run.epsilon0), format_double(run.ramp_rate));
    write_trajectory_csv(out, run.records);
  }
  {
    auto out = open_output(dir / "report.txt");
    out << prov.line();
    out << "epsilon0 = " << format_double(run.epsilon0) << '\n';
    out << "ramp_rate = " << format_double(run.ramp_rate) << '\n';
    out << "max_norm_deviation = " << format_double(run.max_norm_deviation) << '\n';
    out << "wall_contact_samples = " << run.wall_contact_times.size() << '\n';
    write_report(out, run.report);
  }
  {
    auto out = open_output(dir / "report.csv");
    out << prov.line();
    out << "epsilon0,ramp_rate," << kReportCsvHeader << '\n';
    out << format_double(run.epsilon0) << ',' << format_double(run.ramp_rate) << ',' << report_csv_row(run.report)
        << '\n';
  }
  if (!opts.svg) return;

  std::vector<double> psi_0t, n_0t, psi_gst, n_gst, psi_0gs, n_0gs;
  for (const auto& r : run.records) {
    psi_0t.push_back(r.d_psi_0t);
    n_0t.push_back(r.d_n_0t);
    psi_gst.push_back(r.d_psi_gst);
    n_gst.push_back(r.d_n_gst);
    psi_0gs.push_back(r.d_psi_0gs);
    n_0gs.push_back(r.d_n_0gs);
  }
  const std::string label = fmt::format("eps0={}", format_double(run.epsilon0));
  {
    SvgPlot plot("(a) initial GS vs dynamic state", "D_psi(psi(0), psi(t))", "D_n(n(0), n(t))");
    plot.add_series(label, psi_0t, n_0t, "crimson");
    plot.add_reference_line(run.report.slope_used, fmt::format("adiabatic line, slope {}", run.report.slope_used));
    auto out = open_output(dir / "graph_a.svg");
    plot.render(out);
  }
  {
    SvgPlot plot("(b) instantaneous GS vs dynamic state", "D_psi(psi_GS(t), psi(t))", "D_n(n_GS(t), n(t))");
    plot.add_series(label, psi_gst, n_gst, "navy");
    plot.add_marker(0.0, 0.0, "adiabatic point (origin)");
    auto out = open_output(dir / "graph_b.svg");
    plot.render(out);
  }
  const auto t_ref_index = [&]() -> std::optional<std::size_t> {
    if (!opts.t_ref || run.records.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < run.records.size(); ++i)
      if (std::abs(run.records[i].t - *opts.t_ref) < std::abs(run.records[best].t - *opts.t_ref)) best = i;
    return best;
  }();
  for (const auto& [name, xs, ys, what] :
       {std::tuple{"graph_c_density.svg", &n_0gs, &n_0t, "n"}, std::tuple{"graph_c_psi.svg", &psi_0gs, &psi_0t, "psi"}}) {
    SvgPlot plot(fmt::format("(c) {}: instantaneous GS vs dynamic state", what),
                 fmt::format("D_{}(initial, GS(t))", what), fmt::format("D_{}(initial, t)", what));
    plot.add_series(label, *xs, *ys, "darkgreen");
    plot.add_reference_line(1.0, "y = x");
    if (t_ref_index) plot.add_marker((*xs)[*t_ref_index], (*ys)[*t_ref_index], "t_ref");
    auto out = open_output(dir / name);
    plot.render(out);
  }
}

/// Sink writing one density CSV per output time into `dir`.
inline StateSink frame_writer(std::filesystem::path dir, Provenance prov) {
  std::filesystem::create_directories(dir);
  return [dir = std::move(dir), prov = std::move(prov)](const WavefunctionState& psi) {
    auto out = open_output(dir / frame_name(psi.time()));
    out << prov.line();
    write_density_csv(out, density_of(psi));
  };
}

// --- sweeps -------------------------------------------------------------------

struct SweepCell {
  std::string name;  ///< potential label
  PotentialSpec potential;
  double epsilon0 = 0.0;
};

struct SweepCellResult {
  SweepCell cell;
  std::optional<ProtocolRun> run;
  std::string error;
};

inline std::string cell_directory(std::size_t index, const SweepCell& cell) {
  return fmt::format("cell_{:02d}_{}_eps{}", index, cell.name, format_double(cell.epsilon0));
}

/// Runs every cell on `workers` threads; each cell writes only into its own
/// directory, so outputs do not depend on scheduling.
inline std::vector<SweepCellResult> run_sweep(std::span<const SweepCell> cells, const Grid& grid,
                                              const ProtocolSettings& settings, std::size_t workers,
                                              const std::filesystem::path& out_dir, const Provenance& prov,
                                              const EvolveOutputOptions& opts) {
  if (cells.empty()) throw std::invalid_argument("sweep: empty cell list");
  std::vector<SweepCellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i].cell = cells[i];
      try {
        const auto dir = out_dir / cell_directory(i, cells[i]);
        StateSink frames;
        if (opts.frames) frames = frame_writer(dir / "frames", prov);
        auto run = run_protocol(cells[i].potential, grid, cells[i].epsilon0, settings, frames);
        write_protocol_run(dir, run, prov, opts);
        // Trajectories are on disk; keep only what the summary needs.
        run.records.clear();
        results[i].run = std::move(run);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, cells.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();

  auto out = open_output(out_dir / "summary.csv");
  out << prov.line();
  out << "cell,potential,status,epsilon0,ramp_rate," << kReportCsvHeader << '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << i << ',' << r.cell.name << ',' << (r.run ? "ok" : "failed") << ',' << format_double(r.cell.epsilon0)
        << ',';
    if (r.run)
      out << format_double(r.run->ramp_rate) << ',' << report_csv_row(r.run->report);
    else
      out << "nan,,,,,,,,,";
    out << '\n';
  }
  return results;
}

}  // namespace adiabat
