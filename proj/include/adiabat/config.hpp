#pragma once

// Experiment configuration: an INI document with [sections] of key = value
// pairs. Relative file paths resolve against the config file's directory.
//
//   [grid]       half_width, n_points            (or x_min, x_max, n_points)
//   [potential]  file = <path>  | inline potential keys (see potentials.hpp)
//   [gs_study]   family = sho | random, ...
//   [evolve]     epsilon0, dt, t_max, output_stride, slope, margin, t_ref
//   [sweep]      potentials = <path>, <path>, ...; epsilon0 = <e>, <e>, ...
//   [calibrate]  epsilon0 = <e>, <e>, ...

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "adiabat/field_io.hpp"
#include "adiabat/grid.hpp"
#include "adiabat/potentials.hpp"

namespace adiabat {

/// Bad or missing configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a, used to stamp outputs with the config they came from.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Config {
 public:
  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.parent_path());
  }

  static Config parse(const std::string& text, std::filesystem::path base_dir = {}) {
    Config cfg;
    cfg.text_ = text;
    cfg.base_dir_ = std::move(base_dir);
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(fmt::format("config: line {}: {}", e.line(), e.message()));
    }
    return cfg;
  }

  std::uint64_t hash() const { return fnv1a(text_); }
  std::string hash_hex() const { return fmt::format("{:016x}", hash()); }

  bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

  const boost::property_tree::ptree& section(const std::string& section) const {
    const auto child = tree_.get_child_optional(section);
    if (!child) throw ConfigError(fmt::format("config: missing section [{}]", section));
    return *child;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    const auto child = tree_.get_child_optional(section);
    if (!child) return std::nullopt;
    const auto v = child->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::string require_text(const std::string& section, const std::string& key) const {
    auto v = text(section, key);
    if (!v) throw ConfigError(fmt::format("config: missing field {}.{}", section, key));
    return *v;
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    const auto v = text(section, key);
    if (!v) return std::nullopt;
    try {
      return parse_double(*v);
    } catch (const FormatError&) {
      throw ConfigError(fmt::format("config: field {}.{} is not a number: '{}'", section, key, *v));
    }
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return number(section, key).value_or(fallback);
  }

  double require_number(const std::string& section, const std::string& key) const {
    const auto v = number(section, key);
    if (!v) throw ConfigError(fmt::format("config: missing field {}.{}", section, key));
    return *v;
  }

  std::optional<std::uint64_t> integer(const std::string& section, const std::string& key) const {
    const auto v = text(section, key);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw ConfigError(fmt::format("config: field {}.{} is not a nonnegative integer: '{}'", section, key, *v));
    return out;
  }

  std::uint64_t integer_or(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    return integer(section, key).value_or(fallback);
  }

  /// Comma-separated list of raw items, whitespace trimmed.
  std::vector<std::string> list(const std::string& section, const std::string& key) const {
    std::vector<std::string> items;
    const auto v = text(section, key);
    if (!v) return items;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t\r");
      if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
    }
    return items;
  }

  std::vector<double> number_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(section, key)) {
      try {
        out.push_back(parse_double(item));
      } catch (const FormatError&) {
        throw ConfigError(fmt::format("config: field {}.{} has a non-numeric entry '{}'", section, key, item));
      }
    }
    return out;
  }

  std::filesystem::path resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p : base_dir_ / p;
  }

  /// [grid] section; defaults to [-15, 15] with 1201 points.
  Grid grid() const {
    const auto n = integer_or("grid", "n_points", 1201);
    try {
      if (text("grid", "x_min") || text("grid", "x_max"))
        return Grid(require_number("grid", "x_min"), require_number("grid", "x_max"), n);
      return Grid::centered(number_or("grid", "half_width", 15.0), n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config: [grid] {}", e.what()));
    }
  }

  /// A potential from `file = path` or from inline keys of `section`.
  PotentialSpec potential(const std::string& section = "potential") const {
    if (const auto file = text(section, "file")) return load_potential_file(resolve(*file));
    try {
      return potential_from_keys(this->section(section));
    } catch (const FormatError& e) {
      throw ConfigError(fmt::format("config: [{}] {}", section, e.what()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config: [{}] {}", section, e.what()));
    }
  }

  static PotentialSpec load_potential_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("config: potential file '{}' not found", path.string()));
    try {
      return read_potential(in);
    } catch (const FormatError& e) {
      throw ConfigError(fmt::format("config: potential file '{}': {}", path.string(), e.what()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config: potential file '{}': {}", path.string(), e.what()));
    }
  }

 private:
  boost::property_tree::ptree tree_;
  std::string text_;
  std::filesystem::path base_dir_;
};

}  // namespace adiabat
