#include <sstream>

#include <gtest/gtest.h>

#include "adiabat/adiabaticity.hpp"
#include "adiabat/microwells.hpp"
#include "support.hpp"

using namespace adiabat;

namespace {

const Grid kGrid = Grid::centered();

EigenSolution harmonic(double omega, std::size_t k = 2) {
  return lowest_eigenpairs(build_hamiltonian(PotentialSpec{HarmonicWell{omega}}, kGrid, 0.0), k);
}

PotentialSpec split_wells(const Grid& g, double barrier, double tilt) {
  TabulatedPotential tab{g, std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    tab.values[i] = std::abs(x) < 1.5 ? barrier : (x > 0.0 ? tilt : 0.0);
  }
  return PotentialSpec{tab};
}

TrajectoryRecord record(double d_psi_0t, double d_n_0t) {
  TrajectoryRecord r;
  r.d_psi_0t = d_psi_0t;
  r.d_n_0t = d_n_0t;
  return r;
}

}  // namespace

TEST(Epsilon, ZeroWithoutRamp) { EXPECT_EQ(qac_epsilon(harmonic(0.2), 0.0), 0.0); }

TEST(Epsilon, LinearInRate) {
  const auto sol = harmonic(0.2);
  const double e1 = qac_epsilon(sol, 1e-3);
  EXPECT_NEAR(qac_epsilon(sol, 3e-3), 3.0 * e1, 1e-15);
  EXPECT_EQ(qac_epsilon(sol, -1e-3), e1);
  // Oscillator oracle: p / (w^2 sqrt(2 w)).
  EXPECT_NEAR(e1, 1e-3 / (0.04 * std::sqrt(0.4)), 1e-3 * e1);
}

TEST(Epsilon, LevelIndexChecked) { EXPECT_THROW(qac_epsilon(harmonic(0.2), 1e-3, 2, 0), std::out_of_range); }

TEST(Calibrate, HarmonicRate) {
  const auto spec = PotentialSpec{HarmonicWell{0.2}};
  const double p = calibrate_rate(spec, kGrid, 0.01);
  EXPECT_NEAR(p, 2.530e-4, 0.002 * 2.530e-4);
  // Continuum oracle: gap w, dipole 1/sqrt(2w).
  EXPECT_NEAR(p, 0.01 * 0.04 * std::sqrt(0.4), 1e-3 * p);
  // Calibrated rate reproduces the target.
  EXPECT_NEAR(qac_epsilon(harmonic(0.2), p), 0.01, 1e-14);
}

TEST(Calibrate, HundredfoldRule) {
  const PotentialSpec specs[] = {PotentialSpec{HarmonicWell{0.2}}, generate_random(1400, 0.5, 15.0),
                                 reflect_and_scale(generate_random(1400, 0.5, 15.0), 5.0)};
  for (const auto& spec : specs) {
    const double slow = calibrate_rate(spec, kGrid, 0.01);
    const double fast = calibrate_rate(spec, kGrid, 1.0);
    EXPECT_NEAR(fast / slow, 100.0, 4.0 * std::numeric_limits<double>::epsilon() * 100.0);
  }
}

TEST(Calibrate, IgnoresExistingRamp) {
  const auto spec = PotentialSpec{HarmonicWell{0.2}};
  EXPECT_EQ(calibrate_rate(spec.with_ramp(0.5), kGrid, 0.01), calibrate_rate(spec, kGrid, 0.01));
}

TEST(Calibrate, ForbiddenTransition) {
  // Ground state in the left well, first excited state in the raised right
  // well; the barrier leaves no overlap, so <1|x|0> vanishes.
  const auto g = Grid::centered(6.0, 481);
  EXPECT_THROW(calibrate_rate(split_wells(g, 5000.0, 0.05), g, 0.01), std::domain_error);
}

TEST(Calibrate, DegenerateLevels) {
  const auto g = Grid::centered(6.0, 481);
  EXPECT_THROW(calibrate_rate(split_wells(g, 5000.0, 0.0), g, 0.01), DegeneracyError);
  const auto sol = lowest_eigenpairs(build_hamiltonian(split_wells(g, 5000.0, 0.0), g, 0.0), 2);
  EXPECT_THROW(qac_epsilon(sol, 1e-3), DegeneracyError);
}

TEST(Calibrate, RejectsNonPositiveTarget) {
  EXPECT_THROW(calibrate_rate(PotentialSpec{HarmonicWell{0.2}}, kGrid, 0.0), std::invalid_argument);
}

TEST(Trajectory, InitialRecordIsAtOrigin) {
  const auto spec = PotentialSpec{HarmonicWell{0.2}}.with_ramp(2.5e-4);
  const std::vector<double> times{0.0};
  const auto track = instantaneous_eigen_track(spec, kGrid, times, 2);
  const std::vector<WavefunctionState> dynamic{track.solutions[0].states[0]};
  const auto rec = build_trajectory(dynamic, track, 2.5e-4);
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_EQ(rec[0].d_psi_0t, 0.0);
  EXPECT_EQ(rec[0].d_n_0t, 0.0);
  EXPECT_EQ(rec[0].d_psi_gst, 0.0);
  EXPECT_NEAR(rec[0].epsilon, 0.01 * 2.5e-4 / 2.5297628e-4, 1e-6);
  EXPECT_NEAR(rec[0].e0, 0.1, 1e-5);
  EXPECT_NEAR(rec[0].norm, 1.0, 1e-12);
}

TEST(Trajectory, PerfectlyAdiabaticTrackHasZeroDegree) {
  const auto spec = PotentialSpec{HarmonicWell{0.2}}.with_ramp(1e-3);
  const std::vector<double> times{0.0, 10.0, 20.0, 30.0};
  const auto track = instantaneous_eigen_track(spec, kGrid, times, 2);
  std::vector<WavefunctionState> dynamic;
  for (const auto& sol : track.solutions) dynamic.push_back(sol.states[0]);
  const auto rec = build_trajectory(dynamic, track, 1e-3);
  for (const auto& r : rec) {
    EXPECT_EQ(r.d_psi_gst, 0.0);
    EXPECT_EQ(r.d_n_gst, 0.0);
    EXPECT_EQ(r.d_psi_0t, r.d_psi_0gs);
    EXPECT_EQ(degree_of_adiabaticity(r), 0.0);
  }
  EXPECT_GT(rec.back().d_psi_0t, rec[1].d_psi_0t);
  const auto rep = analyze_trajectory(rec);
  EXPECT_EQ(rep.max_degree_percent, 0.0);
  EXPECT_EQ(rep.triangle_violations, 0u);
}

TEST(Trajectory, RejectsMismatchedInputs) {
  const auto spec = PotentialSpec{HarmonicWell{0.2}}.with_ramp(1e-3);
  const std::vector<double> times{0.0, 1.0};
  const auto track = instantaneous_eigen_track(spec, kGrid, times, 2);
  const std::vector<WavefunctionState> one{track.solutions[0].states[0]};
  EXPECT_THROW(build_trajectory(one, track, 1e-3), std::invalid_argument);
  const std::vector<WavefunctionState> shifted{track.solutions[0].states[0], track.solutions[0].states[0]};
  EXPECT_THROW(build_trajectory(shifted, track, 1e-3), std::invalid_argument);
}

TEST(Degree, Examples) {
  TrajectoryRecord r;
  r.d_psi_gst = 0.25;
  EXPECT_DOUBLE_EQ(degree_of_adiabaticity(r), 25.0);
  EXPECT_DOUBLE_EQ(degree_of_adiabaticity(r, 4), 12.5);
  r.d_psi_gst = std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(degree_of_adiabaticity(r), 100.0);
  r.d_psi_gst = 0.0;
  EXPECT_EQ(degree_of_adiabaticity(r), 0.0);
}

TEST(ArchPeriod, SyntheticArches) {
  // Ramp-up to the first maximum, then arches of period T on a slow drift.
  const double period = 31.4;
  std::vector<double> t, v;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(0.1 * i);
    v.push_back(std::abs(std::sin(std::numbers::pi * t.back() / period)) + 0.002 * t.back());
  }
  const auto p = arch_period(t, v);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, period, 0.01 * period);
}

TEST(ArchPeriod, SmoothOscillation) {
  const double period = 15.7;
  std::vector<double> t, v;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(0.1 * i);
    v.push_back(1.0 - std::cos(2.0 * std::numbers::pi * t.back() / period));
  }
  const auto p = arch_period(t, v);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, period, 0.005 * period);
}

TEST(ArchPeriod, NoneForMonotoneOrShortSeries) {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i);
    v.push_back(std::sqrt(static_cast<double>(i)));
  }
  EXPECT_FALSE(arch_period(t, v).has_value());
  // A single arch is not a period.
  std::vector<double> t2, v2;
  for (int i = 0; i <= 100; ++i) {
    t2.push_back(i);
    v2.push_back(std::sin(std::numbers::pi * i / 100.0));
  }
  EXPECT_FALSE(arch_period(t2, v2).has_value());
  v2.pop_back();
  EXPECT_THROW(arch_period(t, v2), std::invalid_argument);
}

TEST(Occupancy, CountsPointsAboveShiftedLine) {
  const std::vector<TrajectoryRecord> recs{record(0.1, 0.15), record(0.1, 0.21), record(0.2, 0.36),
                                           record(0.2, 0.34)};
  // Line 1.5 x + 0.05: 0.2 and 0.35.
  EXPECT_DOUBLE_EQ(occupancy_above_line(recs, 1.5, 0.05), 0.5);
  EXPECT_DOUBLE_EQ(occupancy_above_line(recs, 1.5, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(occupancy_above_line(recs, 1.0, 0.0), 1.0);
  EXPECT_EQ(occupancy_above_line(std::vector<TrajectoryRecord>{}, 1.5, 0.05), 0.0);
  EXPECT_THROW(occupancy_above_line(recs, 0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(occupancy_above_line(recs, 1.5, -0.1), std::invalid_argument);
}

TEST(LineDeviation, LargestVerticalGap) {
  const std::vector<TrajectoryRecord> recs{record(0.1, 0.15), record(0.2, 0.2), record(0.4, 0.7)};
  EXPECT_NEAR(max_line_deviation(recs, 1.5), 0.1, 1e-15);
}

TEST(Triangle, DetectsViolations) {
  TrajectoryRecord ok;
  ok.d_psi_0t = 0.3;
  ok.d_psi_gst = 0.2;
  ok.d_psi_0gs = 0.4;
  ok.d_n_0t = 0.5;
  ok.d_n_gst = 0.2;
  ok.d_n_0gs = 0.3;  // equality is allowed
  TrajectoryRecord bad = ok;
  bad.d_psi_gst = 0.8;
  TrajectoryRecord bad_n = ok;
  bad_n.d_n_0t = 0.6;
  const std::vector<TrajectoryRecord> recs{ok, bad, bad_n};
  EXPECT_EQ(triangle_violations(recs), 2u);
  bad_n.d_n_0t = 0.5 + 5e-11;
  EXPECT_EQ(triangle_violations(std::vector<TrajectoryRecord>{bad_n}), 0u);
}

TEST(Serialization, TrajectoryRoundTrip) {
  std::vector<TrajectoryRecord> recs(3);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    r.t = 0.1 * static_cast<double>(i);
    r.d_psi_0t = 1.0 / 3.0 + static_cast<double>(i);
    r.d_n_0t = 2e-17;
    r.epsilon = std::numeric_limits<double>::quiet_NaN();
    r.e0 = -0.5;
    r.e1 = 0.7;
  }
  std::stringstream ss;
  write_trajectory_csv(ss, recs);
  const auto back = read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].t, recs[i].t);
    EXPECT_EQ(back[i].d_psi_0t, recs[i].d_psi_0t);
    EXPECT_EQ(back[i].d_n_0t, recs[i].d_n_0t);
    EXPECT_TRUE(std::isnan(back[i].epsilon));
    EXPECT_EQ(back[i].e1, recs[i].e1);
  }
}

TEST(Serialization, ReportListsEveryField) {
  AdiabaticityReport rep;
  rep.max_degree_percent = 12.5;
  rep.arch_period_psi = 31.4;
  std::stringstream ss;
  write_report(ss, rep);
  const auto text = ss.str();
  for (const char* key : {"max_degree_percent = 12.5", "arch_period_psi = 31.4", "arch_period_n = absent",
                          "slope_used = 1.5", "margin_used = 0.05", "triangle_violations = 0"})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  const auto row = report_csv_row(rep);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','),
            std::count(kReportCsvHeader, kReportCsvHeader + std::strlen(kReportCsvHeader), ','));
}

TEST(Microwells, SplitAtBarrierMaxima) {
  const auto g = Grid::centered(6.0, 481);
  TabulatedPotential tab{g, std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) tab.values[i] = std::pow(g.x(i) * g.x(i) - 4.0, 2);
  const auto v = evaluate_static(PotentialSpec{tab}, g);
  std::vector<double> density(g.size(), 0.0);
  // Uniform density on [-4, 0): entirely inside the left well.
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.x(i) >= -4.0 && g.x(i) < 0.0) density[i] = 0.25;
  const auto wells = microwells(g, v, density);
  ASSERT_EQ(wells.size(), 2u);
  EXPECT_EQ(wells[1].begin, g.size() / 2);
  EXPECT_NEAR(g.x(wells[0].minimum), -2.0, 1e-12);
  EXPECT_NEAR(wells[0].mass, 1.0, 1e-12);
  EXPECT_EQ(wells[1].mass, 0.0);
  EXPECT_TRUE(is_single_well_localized(wells, 0.95, 1.01));
  EXPECT_FALSE(is_single_well_localized(wells));
  EXPECT_FALSE(is_delocalized(wells));
  EXPECT_EQ(sorted_masses(wells).front(), wells[0].mass);
}
