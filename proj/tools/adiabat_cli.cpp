// Command-line driver: gs-study, evolve, sweep, calibrate.
//
// Exit codes: 0 success, 1 experiment failure, 2 configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "adiabat/adiabat.hpp"

namespace fs = std::filesystem;
using namespace adiabat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::string out = "out";
  std::size_t workers = 1;
  bool svg = false;
  bool frames = false;
};

ProtocolSettings protocol_settings(const Config& cfg) {
  ProtocolSettings s;
  s.dt = cfg.number_or("evolve", "dt", s.dt);
  s.t_max = cfg.number_or("evolve", "t_max", s.t_max);
  s.output_stride = cfg.integer_or("evolve", "output_stride", s.output_stride);
  s.slope = cfg.number_or("evolve", "slope", s.slope);
  s.margin = cfg.number_or("evolve", "margin", s.margin);
  if (!(s.dt > 0.0 && s.dt <= kMaxTimeStep))
    throw ConfigError(fmt::format("config: field evolve.dt = {} must lie in (0, {}]", s.dt, kMaxTimeStep));
  if (!(s.t_max > 0.0)) throw ConfigError("config: field evolve.t_max must be > 0");
  if (s.output_stride < 1) throw ConfigError("config: field evolve.output_stride must be >= 1");
  if (!(s.slope > 0.0)) throw ConfigError("config: field evolve.slope must be > 0");
  if (!(s.margin >= 0.0)) throw ConfigError("config: field evolve.margin must be >= 0");
  return s;
}

std::string seed_text(const PotentialSpec& spec) {
  if (const auto* rf = std::get_if<RandomFourier>(&spec.shape); rf && rf->seed) return std::to_string(*rf->seed);
  return "none";
}

int cmd_gs_study(const Options& opt) {
  const auto cfg = Config::load(opt.config);
  const auto grid = cfg.grid();
  const auto family = cfg.require_text("gs_study", "family");
  Provenance prov{"gs-study", cfg.hash_hex(), "none", grid, std::nullopt};

  GsStudyResult study;
  if (family == "sho") {
    const auto count = cfg.integer_or("gs_study", "count", 23);
    const auto spacing = cfg.text("gs_study", "spacing").value_or("log");
    if (spacing != "log" && spacing != "linear")
      throw ConfigError("config: field gs_study.spacing must be 'log' or 'linear'");
    if (count < 1) throw ConfigError("config: gs_study.count: need >= 2 systems (reference plus one)");
    const auto omegas = sho_family_frequencies(cfg.number_or("gs_study", "omega_min", 0.05),
                                               cfg.number_or("gs_study", "omega_max", 2.20), count,
                                               spacing == "log");
    study = sho_gs_study(grid, omegas, cfg.number_or("gs_study", "reference_omega", 0.1));
  } else if (family == "random") {
    const auto count = cfg.integer_or("gs_study", "count", 10);
    if (count < 2) throw ConfigError("config: gs_study.count: need >= 2 systems");
    const auto seed = cfg.integer_or("gs_study", "seed", 1);
    prov.seed = std::to_string(seed);
    study = random_gs_study(grid, seed, count, cfg.number_or("gs_study", "lambda", 0.1),
                            cfg.number_or("gs_study", "half_width", 15.0));
  } else {
    throw ConfigError(fmt::format("config: field gs_study.family must be 'sho' or 'random', got '{}'", family));
  }
  write_gs_study(opt.out, study, prov, opt.svg);
  std::cout << fmt::format("gs-study: {} pairs, slope {:.4f}, r^2 {:.5f}\n", study.pairs.size(), study.fit.slope,
                           study.fit.r_squared);
  return kExitOk;
}

int cmd_evolve(const Options& opt) {
  const auto cfg = Config::load(opt.config);
  const auto grid = cfg.grid();
  const auto spec = cfg.potential();
  const auto settings = protocol_settings(cfg);
  const double epsilon0 = cfg.require_number("evolve", "epsilon0");
  if (!(epsilon0 > 0.0)) throw ConfigError("config: field evolve.epsilon0 must be > 0");
  const Provenance prov{"evolve", cfg.hash_hex(), seed_text(spec), grid, settings.dt};
  const EvolveOutputOptions outputs{opt.svg, opt.frames, cfg.number("evolve", "t_ref")};

  StateSink frames;
  if (opt.frames) frames = frame_writer(fs::path(opt.out) / "frames", prov);
  const auto run = run_protocol(spec, grid, epsilon0, settings, frames);
  write_protocol_run(opt.out, run, prov, outputs);
  if (!run.wall_contact_times.empty())
    std::cerr << fmt::format("evolve: potential minimum reached the wall at {} output times (first t = {})\n",
                             run.wall_contact_times.size(), run.wall_contact_times.front());
  std::cout << fmt::format("evolve: p = {:.6g}, max degree {:.3f}%, above-line fraction {:.4f}\n", run.ramp_rate,
                           run.report.max_degree_percent, run.report.above_line_fraction);
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  const auto cfg = Config::load(opt.config);
  const auto grid = cfg.grid();
  const auto settings = protocol_settings(cfg);
  const auto files = cfg.list("sweep", "potentials");
  const auto rates = cfg.number_list("sweep", "epsilon0");
  std::vector<SweepCell> cells;
  for (const auto& file : files) {
    const auto spec = Config::load_potential_file(cfg.resolve(file));
    for (double e : rates) {
      if (!(e > 0.0)) throw ConfigError("config: sweep.epsilon0 entries must be > 0");
      cells.push_back({fs::path(file).stem().string(), spec, e});
    }
  }
  if (cells.empty()) throw ConfigError("config: sweep has no cells (sweep.potentials x sweep.epsilon0 is empty)");
  const Provenance prov{"sweep", cfg.hash_hex(), "none", grid, settings.dt};
  const auto results =
      run_sweep(cells, grid, settings, opt.workers, opt.out, prov, {opt.svg, opt.frames, cfg.number("evolve", "t_ref")});
  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].run) continue;
    ++failed;
    std::cerr << fmt::format("sweep: cell {} ({}, eps0 = {}) failed: {}\n", i, results[i].cell.name,
                             results[i].cell.epsilon0, results[i].error);
  }
  std::cout << fmt::format("sweep: {} cells, {} failed\n", results.size(), failed);
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_calibrate(const Options& opt) {
  const auto cfg = Config::load(opt.config);
  const auto grid = cfg.grid();
  const auto spec = cfg.potential();
  auto targets = cfg.number_list("calibrate", "epsilon0");
  if (targets.empty()) throw ConfigError("config: field calibrate.epsilon0 is empty or missing");
  const Provenance prov{"calibrate", cfg.hash_hex(), seed_text(spec), grid, std::nullopt};
  auto out = open_output(fs::path(opt.out) / "calibration.csv");
  out << prov.line();
  out << "epsilon0,ramp_rate\n";
  for (double e : targets) {
    if (!(e > 0.0)) throw ConfigError("config: calibrate.epsilon0 entries must be > 0");
    const double p = calibrate_rate(spec, grid, e);
    out << format_double(e) << ',' << format_double(p) << '\n';
    std::cout << fmt::format("epsilon0 = {} -> p = {:.6g}\n", e, p);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabaticity diagnostics for ramped 1D quantum systems"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--workers", opt.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--svg", opt.svg, "Also write SVG graphs");
    sub->add_flag("--frames", opt.frames, "Export per-output-time density frames");
  };
  auto* gs = app.add_subcommand("gs-study", "Ground-state D_n vs D_psi study");
  auto* evolve_cmd = app.add_subcommand("evolve", "Ramped evolution of one potential");
  auto* sweep = app.add_subcommand("sweep", "Batch of evolutions over potentials x epsilon0");
  auto* calibrate = app.add_subcommand("calibrate", "Ramp rates for target epsilon(0)");
  for (auto* sub : {gs, evolve_cmd, sweep, calibrate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gs->parsed()) return cmd_gs_study(opt);
    if (evolve_cmd->parsed()) return cmd_evolve(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (calibrate->parsed()) return cmd_calibrate(opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitConfig;
}
