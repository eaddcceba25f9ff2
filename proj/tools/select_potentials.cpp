// Scans random-potential seeds for the localized/delocalized pair used by the
// evolution protocol and writes them as potential files.
//
// r1: ground state mostly in one microwell with a small leak.
// r2: r1 reflected, Fourier amplitude divided by the factor; ground state
//     shared between at least two microwells.
// Both must keep a finite 0-1 dipole and, at every epsilon0 in the protocol,
// an instantaneous epsilon(t) that never exceeds epsilon(0) on t = 0..t_max.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "adiabat/adiabat.hpp"

using namespace adiabat;

namespace {

struct Criteria {
  double lambda = 0.5;
  double half_width = 15.0;
  double reflect_factor = 5.0;
  double min_dipole = 0.1;
  double t_max = 100.0;
  std::vector<double> epsilon0{0.01, 1.0};
};

double ground_dipole(const PotentialSpec& spec, const Grid& grid, std::vector<double>& density) {
  const auto sol = lowest_eigenpairs(build_hamiltonian(spec, grid, 0.0), 2);
  density.clear();
  for (const auto& a : sol.states[0].amplitudes()) density.push_back(std::norm(a));
  return dipole_element(sol, 1, 0);
}

bool spectrally_tame(const PotentialSpec& spec, const Grid& grid, const Criteria& c) {
  std::vector<double> times;
  for (double t = 0.0; t <= c.t_max + 1e-9; t += 1.0) times.push_back(t);
  for (double e0 : c.epsilon0) {
    const double p = calibrate_rate(spec, grid, e0);
    const auto track = instantaneous_eigen_track(spec.with_ramp(p), grid, times, 2);
    for (const auto& sol : track.solutions)
      if (!(qac_epsilon(sol, p) <= e0 * (1.0 + 1e-9))) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Select the r1/r2 random potentials"};
  std::string out_dir = "data/potentials";
  std::uint64_t first_seed = 1;
  std::uint64_t last_seed = 100000;
  app.add_option("--out", out_dir, "Directory for r1.pot and r2.pot");
  app.add_option("--first-seed", first_seed);
  app.add_option("--last-seed", last_seed);
  CLI11_PARSE(app, argc, argv);

  const Criteria c;
  const Grid grid = Grid::centered(c.half_width, 1201);
  std::vector<double> density;
  for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
    const auto r1 = generate_random(seed, c.lambda, c.half_width);
    const auto r2 = reflect_and_scale(r1, c.reflect_factor);

    const double d1 = ground_dipole(r1, grid, density);
    const auto wells1 = microwells(grid, evaluate(r1, grid, 0.0), density);
    if (!is_single_well_localized(wells1) || std::abs(d1) <= c.min_dipole) continue;
    const double d2 = ground_dipole(r2, grid, density);
    const auto wells2 = microwells(grid, evaluate(r2, grid, 0.0), density);
    if (!is_delocalized(wells2) || std::abs(d2) <= c.min_dipole) continue;
    if (!spectrally_tame(r1, grid, c) || !spectrally_tame(r2, grid, c)) continue;

    std::filesystem::create_directories(out_dir);
    for (const auto& [name, spec] : {std::pair{"r1", r1}, std::pair{"r2", r2}}) {
      std::ofstream os(std::filesystem::path(out_dir) / fmt::format("{}.pot", name));
      os << fmt::format("# selected from seed {}\n", seed);
      write_potential(os, spec);
    }
    std::cout << fmt::format("seed {}: r1 dominant mass {:.6f}, r2 second mass {:.6f}\n", seed,
                             sorted_masses(wells1)[0], sorted_masses(wells2)[1]);
    return 0;
  }
  std::cerr << "no seed in range satisfies the selection criteria\n";
  return 1;
}
