#pragma once

// Microwell decomposition of a potential and the localization classes used
// to pick the bundled random potentials.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "adiabat/grid.hpp"

namespace adiabat {

/// Grid index range [begin, end) between two successive maxima of V.
struct Microwell {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t minimum = 0;
  double mass = 0.0;  ///< density integrated over the well
};

/// Splits the grid at the interior local maxima of `potential` and
/// integrates `density` over each piece. Wells come back in spatial order.
inline std::vector<Microwell> microwells(const Grid& grid, std::span<const double> potential,
                                         std::span<const double> density) {
  if (potential.size() != grid.size() || density.size() != grid.size())
    throw GridMismatchError("microwells: field sizes do not match grid");
  std::vector<std::size_t> cuts{0};
  for (std::size_t i = 1; i + 1 < potential.size(); ++i)
    if (potential[i] > potential[i - 1] && potential[i] >= potential[i + 1]) cuts.push_back(i);
  cuts.push_back(potential.size());

  std::vector<Microwell> wells;
  for (std::size_t w = 0; w + 1 < cuts.size(); ++w) {
    Microwell well{cuts[w], cuts[w + 1], cuts[w], 0.0};
    for (std::size_t i = well.begin; i < well.end; ++i) {
      well.mass += density[i] * grid.dx();
      if (potential[i] < potential[well.minimum]) well.minimum = i;
    }
    wells.push_back(well);
  }
  return wells;
}

/// Masses of the wells, largest first.
inline std::vector<double> sorted_masses(std::span<const Microwell> wells) {
  std::vector<double> m;
  for (const auto& w : wells) m.push_back(w.mass);
  std::sort(m.begin(), m.end(), std::greater<>());
  return m;
}

/// Ground state sits in one well and leaks slightly into others.
inline bool is_single_well_localized(std::span<const Microwell> wells, double min_dominant = 0.95,
                                     double max_dominant = 0.9999) {
  const auto m = sorted_masses(wells);
  return !m.empty() && m[0] >= min_dominant && m[0] <= max_dominant;
}

/// Ground state spread over at least two wells, each holding `min_share`.
inline bool is_delocalized(std::span<const Microwell> wells, double min_share = 0.2) {
  const auto m = sorted_masses(wells);
  return m.size() >= 2 && m[1] >= min_share;
}

}  // namespace adiabat
