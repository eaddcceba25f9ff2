// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <fmt/format.h>

#include "adiabat/adiabat.hpp"

using namespace adiabat;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
  const auto start = Clock::now();
  Verdict v{false, ""};
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, fmt::format("exception: {}", e.what())};
  }
  if (!v.pass) ++failures;
  std::cout << fmt::format("[{}] {:2d} {}: {} ({:.2f} s)", v.pass ? "PASS" : "FAIL", id, title, v.detail,
                           seconds_since(start))
            << std::endl;
}

const fs::path kSource = ADIABAT_SOURCE_DIR;
const Grid kGrid = Grid::centered();
const std::vector<std::string> kPotentials{"ho", "r1", "r2"};
const std::vector<double> kRates{0.01, 1.0};

PotentialSpec bundled(const std::string& name) {
  return Config::load_potential_file(kSource / "data" / "potentials" / (name + ".pot"));
}

using RunKey = std::pair<std::string, double>;

// The six protocol runs, shared by criteria 5 and 7 to 10.
const std::map<RunKey, ProtocolRun>& protocol_runs() {
  static const auto runs = [] {
    std::map<RunKey, ProtocolRun> out;
    for (const auto& name : kPotentials)
      for (double e : kRates) out.emplace(RunKey{name, e}, run_protocol(bundled(name), kGrid, e, ProtocolSettings{}));
    return out;
  }();
  return runs;
}

std::string label(const RunKey& key) { return fmt::format("{}@{}", key.first, format_double(key.second)); }

// --- 1 ---------------------------------------------------------------------------

Verdict sho_gradient() {
  const auto t0 = Clock::now();
  const auto study = sho_gs_study(kGrid, sho_family_frequencies(0.05, 2.20, 23), 0.1);
  const double secs = seconds_since(t0);
  const bool ok = study.fit.slope >= 1.40 && study.fit.slope <= 1.46 && study.fit.r_squared >= 0.98 && secs < 10.0;
  return {ok, fmt::format("slope {:.4f} in [1.40, 1.46], r2 {:.5f} >= 0.98, runtime {:.2f} s < 10 s", study.fit.slope,
                          study.fit.r_squared, secs)};
}

// --- 2 ---------------------------------------------------------------------------

Verdict sho_limit_and_grid() {
  const double limit = 4.0 / std::sqrt(std::numbers::e * std::numbers::pi);
  double worst_limit = 0.0;
  for (double nu : {1.0 + 1e-7, 1.0 - 1e-7}) worst_limit = std::max(worst_limit, std::abs(sho_ratio(nu) - limit));

  // Frequencies 1/sqrt(nu) and sqrt(nu) keep both ground states well inside the box.
  double worst_grid = 0.0;
  for (double nu : {0.05, 0.1, 0.5, 2.0, 5.0, 20.0}) {
    const double w_ref = 1.0 / std::sqrt(nu);
    const auto a = ground_state(PotentialSpec{HarmonicWell{w_ref}}, kGrid);
    const auto b = ground_state(PotentialSpec{HarmonicWell{w_ref * nu}}, kGrid);
    const auto m = metric_pair(a, b);
    worst_grid = std::max(worst_grid, std::abs(m.d_n / m.d_psi - sho_ratio(nu)));
  }
  return {worst_limit <= 1e-6 && worst_grid <= 1e-3,
          fmt::format("|ratio(1 +- 1e-7) - 4/sqrt(e pi)| = {:.2e} <= 1e-6; max |analytic - gridded| over 6 nu = "
                      "{:.2e} <= 1e-3",
                      worst_limit, worst_grid)};
}

// --- 3 ---------------------------------------------------------------------------

Verdict random_family_slope() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto study = random_gs_study(kGrid, seed, 10, 0.1, 15.0);
    const bool good = study.pairs.size() == 45 && study.fit.slope >= 1.40 && study.fit.slope <= 1.80 &&
                      study.fit.r_squared >= 0.95;
    ok = ok && good;
    detail += fmt::format("{}seed {}: slope {:.4f}, r2 {:.4f}", detail.empty() ? "" : "; ", seed, study.fit.slope,
                          study.fit.r_squared);
  }
  return {ok, detail + " (need slope in [1.40, 1.80], r2 >= 0.95, 45 pairs)"};
}

// --- 4 ---------------------------------------------------------------------------

Verdict eigensolver() {
  const double w = 0.2;
  const auto sol = lowest_eigenpairs(build_hamiltonian(PotentialSpec{HarmonicWell{w}}, kGrid, 0.0), 6);
  double worst = 0.0;
  for (std::size_t n = 0; n < 6; ++n) worst = std::max(worst, std::abs(sol.energies[n] - w * (n + 0.5)));
  const double dipole_err = std::abs(std::abs(dipole_element(sol, 1, 0)) - 1.0 / std::sqrt(2.0 * w));
  return {worst <= 1e-3 && dipole_err <= 1e-4,
          fmt::format("max |E_n - w(n+1/2)| = {:.2e} <= 1e-3 (n <= 5); dipole error {:.2e} <= 1e-4", worst,
                      dipole_err)};
}

// --- 5 ---------------------------------------------------------------------------

std::array<double, 6> final_distances(const ProtocolRun& run) {
  const auto& r = run.records.back();
  return {r.d_psi_0t, r.d_n_0t, r.d_psi_gst, r.d_n_gst, r.d_psi_0gs, r.d_n_0gs};
}

Verdict unitarity_and_convergence() {
  double worst_norm = 0.0;
  for (const auto& [key, run] : protocol_runs()) worst_norm = std::max(worst_norm, run.max_norm_deviation);

  // Time-step study at the production step: the change from halving dt must
  // stay within 4x the change predicted by dt^2 scaling of the previous halving.
  // Distances that do not depend on dt (initial GS vs instantaneous GS) are
  // identical to rounding and are excluded from the order estimate.
  const double dt = ProtocolSettings{}.dt;
  constexpr double kRoundoff = 1e-11;
  ProtocolSettings s;
  s.t_max = 20.0;
  s.output_stride = 1000;
  bool ok = worst_norm < 1e-10;
  double min_order = std::numeric_limits<double>::infinity();
  double worst_ratio = 0.0;
  for (const char* name : {"ho", "r1", "r2"}) {
    std::vector<std::array<double, 6>> finals;
    for (double step : {2.0 * dt, dt, 0.5 * dt}) {
      s.dt = step;
      s.output_stride = static_cast<std::size_t>(std::llround(s.t_max / step));
      const auto run = run_protocol(bundled(name), kGrid, 1.0, s);
      worst_norm = std::max(worst_norm, run.max_norm_deviation);
      finals.push_back(final_distances(run));
    }
    for (std::size_t k = 0; k < 6; ++k) {
      const double coarse = std::abs(finals[0][k] - finals[1][k]);
      const double fine = std::abs(finals[1][k] - finals[2][k]);
      if (coarse < kRoundoff) {
        ok = ok && fine < kRoundoff;
        continue;
      }
      const double predicted = coarse / 4.0;
      worst_ratio = std::max(worst_ratio, fine / predicted);
      min_order = std::min(min_order, std::log2(coarse / fine));
    }
  }
  ok = ok && worst_norm < 1e-10 && min_order >= 1.8 && worst_ratio <= 4.0;
  return {ok, fmt::format("max |norm - 1| = {:.2e} < 1e-10 over all runs; dt {} -> {}: min observed order {:.3f} "
                          ">= 1.8, max change / dt^2 estimate {:.3f} <= 4",
                          worst_norm, dt, 0.5 * dt, min_order, worst_ratio)};
}

// --- 6 ---------------------------------------------------------------------------

Verdict calibration() {
  const double p = calibrate_rate(bundled("ho"), kGrid, 0.01);
  bool ok = std::abs(p - 2.530e-4) <= 0.002 * 2.530e-4;
  double worst = 0.0;
  for (const auto& name : kPotentials) {
    const auto spec = bundled(name);
    const double slow = calibrate_rate(spec, kGrid, 0.01);
    const double fast = calibrate_rate(spec, kGrid, 1.0);
    worst = std::max(worst, std::abs(fast / (100.0 * slow) - 1.0));
  }
  const double ulp4 = 4.0 * std::numeric_limits<double>::epsilon();
  ok = ok && worst <= ulp4;
  return {ok, fmt::format("p(ho, 0.01) = {:.6e} (2.530e-4 +- 0.2%); max |p(1)/(100 p(0.01)) - 1| = {:.1e} <= 4 ulp",
                          p, worst)};
}

// --- 7 ---------------------------------------------------------------------------

Verdict arch_periods() {
  const auto t0 = Clock::now();
  const auto run = run_protocol(bundled("ho"), kGrid, 0.01, ProtocolSettings{});
  const double secs = seconds_since(t0);
  const double omega = std::get<HarmonicWell>(bundled("ho").shape).omega;
  const double target_psi = 2.0 * std::numbers::pi / omega;
  const double target_n = std::numbers::pi / omega;
  const auto psi = run.report.arch_period_psi;
  const auto n = run.report.arch_period_n;
  const bool ok = psi && n && std::abs(*psi - target_psi) <= 0.1 * target_psi &&
                  std::abs(*n - target_n) <= 0.1 * target_n && secs < 60.0;
  return {ok, fmt::format("psi period {} vs {:.2f} +- 10%, density period {} vs {:.2f} +- 10%, runtime {:.1f} s < 60 s",
                          optional_text(psi), target_psi, optional_text(n), target_n, secs)};
}

// --- 8 to 10 -----------------------------------------------------------------------

Verdict ordering() {
  const auto& runs = protocol_runs();
  bool ok = true;
  std::string detail;
  for (const auto& name : kPotentials) {
    const auto& slow = runs.at({name, 0.01});
    const auto& fast = runs.at({name, 1.0});
    const bool good = slow.report.max_degree_percent < fast.report.max_degree_percent &&
                      slow.report.max_line_deviation <= 0.1;
    ok = ok && good;
    detail += fmt::format("{}{}: degree {:.2f}% < {:.2f}%, line deviation {:.4f} <= 0.1", detail.empty() ? "" : "; ",
                          name, slow.report.max_degree_percent, fast.report.max_degree_percent,
                          slow.report.max_line_deviation);
  }
  return {ok, detail};
}

Verdict triangle_audit() {
  std::size_t total = 0, records = 0;
  for (const auto& [key, run] : protocol_runs()) {
    total += run.report.triangle_violations;
    records += run.records.size();
  }
  return {total == 0, fmt::format("{} violations beyond 1e-10 over {} records in 6 runs", total, records)};
}

Verdict occupancy() {
  bool ok = true;
  std::string detail;
  for (const auto& [key, run] : protocol_runs()) {
    const double f = occupancy_above_line(run.records, 1.5, 0.05);
    ok = ok && f <= 0.05;
    detail += fmt::format("{}{} {:.4f}", detail.empty() ? "" : ", ", label(key), f);
  }
  return {ok, "fraction above line (<= 0.05): " + detail};
}

// --- 11 ----------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const auto root = fs::temp_directory_path() / "adiabat_acceptance_sweep";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto pots = kSource / "data" / "potentials";
  const auto config = root / "sweep.ini";
  std::ofstream(config) << fmt::format(
      "[grid]\nhalf_width = 15\nn_points = 601\n"
      "[sweep]\npotentials = {0}/ho.pot, {0}/r1.pot, {0}/r2.pot\nepsilon0 = 0.01, 1.0\n"
      "[evolve]\ndt = 0.002\nt_max = 10\noutput_stride = 50\n",
      pots.string());
  std::vector<std::pair<int, fs::path>> runs{{1, root / "w1"}, {3, root / "w3"}, {1, root / "w1_again"}};
  for (const auto& [workers, dir] : runs) {
    const auto cmd = fmt::format("{} sweep --config {} --out {} --workers {} > {}/log_{}.txt 2>&1", ADIABAT_CLI,
                                 config.string(), dir.string(), workers, root.string(), dir.filename().string());
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, fmt::format("sweep with --workers {} exited with status {}", workers, status)};
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(runs[0].second)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const auto rel = fs::relative(entry.path(), runs[0].second);
    const auto reference = slurp(entry.path());
    for (std::size_t k = 1; k < runs.size(); ++k)
      if (slurp(runs[k].second / rel) != reference) return {false, fmt::format("{} differs", rel.string())};
    ++compared;
  }
  const bool ok = compared == 1 + 6 * 2;
  return {ok, fmt::format("{} CSV files byte-identical across --workers 1, 3 and a repeat", compared)};
}

}  // namespace

int main() {
  std::cout << "adiabat acceptance suite" << std::endl;
  report(1, "SHO ground-state gradient", sho_gradient);
  report(2, "SHO ratio limit and gridded cross-check", sho_limit_and_grid);
  report(3, "random-family quasi-linearity", random_family_slope);
  report(4, "eigensolver accuracy", eigensolver);
  report(5, "propagator unitarity and dt convergence", unitarity_and_convergence);
  report(6, "rate calibration", calibration);
  report(7, "arch periods", arch_periods);
  report(8, "adiabatic vs non-adiabatic ordering", ordering);
  report(9, "triangle inequality audit", triangle_audit);
  report(10, "non-ergodicity occupancy", occupancy);
  report(11, "sweep determinism", determinism);
  std::cout << fmt::format("{} of 11 criteria passed", 11 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
