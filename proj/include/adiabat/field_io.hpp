#pragma once

// CSV serialization of gridded fields: "x,value" for real fields and
// "x,re,im" for complex ones, a header row, 17 significant digits.
// Lines starting with '#' are comments and are skipped on read.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "adiabat/grid.hpp"

namespace adiabat {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) { return fmt::format("{}", v); }

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw FormatError(fmt::format("not a number: '{}'", text));
  return value;
}

inline void write_field_csv(std::ostream& os, const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw GridMismatchError("write_field_csv: size mismatch");
  os << "x,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << format_double(grid.x(i)) << ',' << format_double(values[i]) << '\n';
}

inline void write_field_csv(std::ostream& os, const Grid& grid, std::span<const cplx> values) {
  if (values.size() != grid.size()) throw GridMismatchError("write_field_csv: size mismatch");
  os << "x,re,im\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << format_double(grid.x(i)) << ',' << format_double(values[i].real()) << ','
       << format_double(values[i].imag()) << '\n';
}

inline void write_state_csv(std::ostream& os, const WavefunctionState& psi) {
  write_field_csv(os, psi.grid(), psi.amplitudes());
}

inline void write_density_csv(std::ostream& os, const DensityProfile& n) {
  write_field_csv(os, n.grid(), n.values());
}

/// Columns of a parsed field CSV; `columns[0]` holds x.
struct FieldTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

inline FieldTable read_field_csv(std::istream& is) {
  FieldTable table;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(c);
      table.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != table.header.size())
      throw FormatError(fmt::format("field csv: expected {} cells, got {}", table.header.size(),
                                    cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) table.columns[c].push_back(parse_double(cells[c]));
  }
  if (table.header.empty()) throw FormatError("field csv: missing header");
  return table;
}

/// Reads a complex field written by write_state_csv back onto `grid`.
inline WavefunctionState read_state_csv(std::istream& is, const Grid& grid, double time = 0.0) {
  const auto table = read_field_csv(is);
  if (table.header != std::vector<std::string>{"x", "re", "im"})
    throw FormatError("state csv: header must be x,re,im");
  if (table.columns[0].size() != grid.size()) throw GridMismatchError("state csv: wrong row count");
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (table.columns[0][i] != grid.x(i)) throw GridMismatchError("state csv: x column off grid");
    amps[i] = {table.columns[1][i], table.columns[2][i]};
  }
  return WavefunctionState(grid, std::move(amps), time);
}

}  // namespace adiabat
