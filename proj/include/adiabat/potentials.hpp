#pragma once

// Static external potentials (harmonic, random Fourier, tabulated) plus the
// linear field ramp -p t x.
//
// Potential files are "key = value" text, one pair per line, '#' or ';'
// comments:
//
//   variant    = harmonic | random_fourier | tabulated
//   ramp_rate  = <p>                      (optional, default 0)
//   omega      = <w>                      (harmonic)
//   lambda     = <scale>                  (random_fourier)
//   half_width = <L>                      (random_fourier)
//   a1 a2 a3 b1 b2 b3 = <coefficient>     (random_fourier)
//   seed       = <uint64>                 (random_fourier, optional)
//   x_min, x_max, n_points                (tabulated grid)
//   values     = <v0> <v1> ...            (tabulated, space separated)
//
// Numbers are written in shortest round-trip form, so write/read is exact.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "adiabat/field_io.hpp"
#include "adiabat/grid.hpp"
#include "adiabat/rng.hpp"

namespace adiabat {

struct HarmonicWell {
  double omega = 0.0;
  bool operator==(const HarmonicWell&) const = default;
};

/// x^10 / 10^11 + lambda * sum_{n=1..3} (a_n cos(n pi x / L) + b_n sin(n pi x / L))
struct RandomFourier {
  double lambda = 0.0;
  double half_width = 15.0;
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  std::optional<std::uint64_t> seed;
  bool operator==(const RandomFourier&) const = default;
};

struct TabulatedPotential {
  Grid grid{-1.0, 1.0, 3};
  std::vector<double> values;
  bool operator==(const TabulatedPotential&) const = default;
};

struct PotentialSpec {
  std::variant<HarmonicWell, RandomFourier, TabulatedPotential> shape;
  double ramp_rate = 0.0;

  bool operator==(const PotentialSpec&) const = default;

  PotentialSpec with_ramp(double p) const {
    PotentialSpec copy = *this;
    copy.ramp_rate = p;
    return copy;
  }
};

inline constexpr double confinement(double x) noexcept {
  const double x2 = x * x;
  const double x4 = x2 * x2;
  return x4 * x4 * x2 / 1e11;
}

inline double fourier_part(const RandomFourier& rf, double x) {
  double sum = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const double k = n * std::numbers::pi / rf.half_width;
    sum += rf.a[n - 1] * std::cos(k * x) + rf.b[n - 1] * std::sin(k * x);
  }
  return rf.lambda * sum;
}

inline void validate(const PotentialSpec& spec) {
  if (const auto* h = std::get_if<HarmonicWell>(&spec.shape)) {
    if (!(h->omega > 0.0)) throw std::invalid_argument("harmonic potential needs omega > 0");
  } else if (const auto* rf = std::get_if<RandomFourier>(&spec.shape)) {
    if (!(rf->half_width > 0.0)) throw std::invalid_argument("random_fourier needs half_width > 0");
    if (!std::isfinite(rf->lambda)) throw std::invalid_argument("random_fourier lambda not finite");
    const double bound = rf->half_width / 3.0;
    for (int n = 0; n < 3; ++n)
      if (!(std::abs(rf->a[n]) <= bound && std::abs(rf->b[n]) <= bound))
        throw std::invalid_argument(
            fmt::format("random_fourier coefficients must lie in [-L/3, L/3] = [-{0}, {0}]", bound));
  } else {
    const auto& tab = std::get<TabulatedPotential>(spec.shape);
    if (tab.values.size() != tab.grid.size())
      throw std::invalid_argument("tabulated potential: value count does not match its grid");
    for (double v : tab.values)
      if (!std::isfinite(v)) throw std::invalid_argument("tabulated potential has non-finite values");
  }
  if (!std::isfinite(spec.ramp_rate)) throw std::invalid_argument("ramp_rate not finite");
}

/// Static part of the potential on the grid, without the ramp.
inline std::vector<double> evaluate_static(const PotentialSpec& spec, const Grid& grid) {
  std::vector<double> v(grid.size());
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, HarmonicWell>) {
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = grid.x(i);
            v[i] = 0.5 * shape.omega * shape.omega * x * x;
          }
        } else if constexpr (std::is_same_v<T, RandomFourier>) {
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = grid.x(i);
            v[i] = confinement(x) + fourier_part(shape, x);
          }
        } else {
          require_same_grid(shape.grid, grid, "tabulated potential");
          v = shape.values;
        }
      },
      spec.shape);
  return v;
}

/// V(x_i, t) = V_static(x_i) - p t x_i.
inline std::vector<double> evaluate(const PotentialSpec& spec, const Grid& grid, double t) {
  auto v = evaluate_static(spec, grid);
  if (spec.ramp_rate != 0.0 && t != 0.0) {
    const double pt = spec.ramp_rate * t;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= pt * grid.x(i);
  }
  return v;
}

/// Six coefficients a1..a3 then b1..b3, drawn uniformly from [-L/3, L/3).
inline PotentialSpec generate_random(std::uint64_t seed, double lambda, double half_width) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("generate_random: lambda must be >= 0");
  if (!(half_width > 0.0)) throw std::invalid_argument("generate_random: half_width must be > 0");
  Xoshiro256StarStar rng(seed);
  RandomFourier rf;
  rf.lambda = lambda;
  rf.half_width = half_width;
  const double bound = half_width / 3.0;
  for (auto& a : rf.a) a = rng.uniform(-bound, bound);
  for (auto& b : rf.b) b = rng.uniform(-bound, bound);
  rf.seed = seed;
  return PotentialSpec{rf, 0.0};
}

/// Mirrors the Fourier part in x and divides it by `factor`; the x^10 wall is kept.
inline PotentialSpec reflect_and_scale(const PotentialSpec& spec, double factor) {
  const auto* rf = std::get_if<RandomFourier>(&spec.shape);
  if (rf == nullptr) throw std::invalid_argument("reflect_and_scale needs a random_fourier potential");
  if (factor == 0.0) throw std::invalid_argument("reflect_and_scale: factor must be nonzero");
  RandomFourier out = *rf;
  out.lambda = rf->lambda / factor;
  for (auto& b : out.b) b = -b;
  out.seed.reset();
  return PotentialSpec{out, spec.ramp_rate};
}

// --- key-value file format ---------------------------------------------------

namespace detail {

inline std::string shortest(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::uint64_t parse_u64(const std::string& text, const char* key) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw FormatError(fmt::format("potential: '{}' is not an unsigned integer: '{}'", key, text));
  return value;
}

inline double require_double(const boost::property_tree::ptree& kv, const char* key) {
  const auto text = kv.get_optional<std::string>(key);
  if (!text) throw FormatError(fmt::format("potential: missing key '{}'", key));
  try {
    return parse_double(*text);
  } catch (const FormatError&) {
    throw FormatError(fmt::format("potential: key '{}' is not a number: '{}'", key, *text));
  }
}

}  // namespace detail

inline void write_potential(std::ostream& os, const PotentialSpec& spec) {
  using detail::shortest;
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, HarmonicWell>) {
          os << "variant = harmonic\n";
          os << "omega = " << shortest(shape.omega) << '\n';
        } else if constexpr (std::is_same_v<T, RandomFourier>) {
          os << "variant = random_fourier\n";
          os << "lambda = " << shortest(shape.lambda) << '\n';
          os << "half_width = " << shortest(shape.half_width) << '\n';
          for (int n = 0; n < 3; ++n) os << 'a' << n + 1 << " = " << shortest(shape.a[n]) << '\n';
          for (int n = 0; n < 3; ++n) os << 'b' << n + 1 << " = " << shortest(shape.b[n]) << '\n';
          if (shape.seed) os << "seed = " << *shape.seed << '\n';
        } else {
          os << "variant = tabulated\n";
          os << "x_min = " << shortest(shape.grid.x_min()) << '\n';
          os << "x_max = " << shortest(shape.grid.x_max()) << '\n';
          os << "n_points = " << shape.grid.size() << '\n';
          os << "values =";
          for (double v : shape.values) os << ' ' << shortest(v);
          os << '\n';
        }
      },
      spec.shape);
  os << "ramp_rate = " << shortest(spec.ramp_rate) << '\n';
}

/// Builds a spec from already-parsed key-value pairs (a file or a config section).
inline PotentialSpec potential_from_keys(const boost::property_tree::ptree& kv) {
  using detail::require_double;
  const auto variant = kv.get_optional<std::string>("variant");
  if (!variant) throw FormatError("potential: missing key 'variant'");

  PotentialSpec spec;
  if (*variant == "harmonic") {
    spec.shape = HarmonicWell{require_double(kv, "omega")};
  } else if (*variant == "random_fourier") {
    RandomFourier rf;
    rf.lambda = require_double(kv, "lambda");
    rf.half_width = require_double(kv, "half_width");
    for (int n = 0; n < 3; ++n) {
      rf.a[n] = require_double(kv, fmt::format("a{}", n + 1).c_str());
      rf.b[n] = require_double(kv, fmt::format("b{}", n + 1).c_str());
    }
    if (const auto seed = kv.get_optional<std::string>("seed"))
      rf.seed = detail::parse_u64(*seed, "seed");
    spec.shape = rf;
  } else if (*variant == "tabulated") {
    const auto n_text = kv.get_optional<std::string>("n_points");
    if (!n_text) throw FormatError("potential: missing key 'n_points'");
    const Grid grid(require_double(kv, "x_min"), require_double(kv, "x_max"),
                    detail::parse_u64(*n_text, "n_points"));
    TabulatedPotential tab{grid, {}};
    std::istringstream values(kv.get<std::string>("values", ""));
    std::string token;
    while (values >> token) tab.values.push_back(parse_double(token));
    spec.shape = std::move(tab);
  } else {
    throw FormatError(fmt::format("potential: unknown variant '{}'", *variant));
  }
  if (kv.get_optional<std::string>("ramp_rate")) spec.ramp_rate = require_double(kv, "ramp_rate");
  validate(spec);
  return spec;
}

inline PotentialSpec read_potential(std::istream& is) {
  boost::property_tree::ptree kv;
  try {
    boost::property_tree::ini_parser::read_ini(is, kv);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError(fmt::format("potential: {}", e.message()));
  }
  return potential_from_keys(kv);
}

}  // namespace adiabat
