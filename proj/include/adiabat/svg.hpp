#pragma once

// Minimal SVG line plots: axes with ticks, polylines, reference lines and
// point markers. Enough to render the metric graphs without a plotting stack.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace adiabat {

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(std::string label, std::vector<double> xs, std::vector<double> ys, std::string color) {
    series_.push_back({std::move(label), std::move(xs), std::move(ys), std::move(color)});
  }

  /// Dashed line y = slope * x through the origin across the plot range.
  void add_reference_line(double slope, std::string label) { lines_.push_back({slope, std::move(label)}); }

  void add_marker(double x, double y, std::string label) { markers_.push_back({x, y, std::move(label)}); }

  void render(std::ostream& os) const {
    constexpr double width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 60;
    double x_lo = 0.0, y_lo = 0.0;
    double x_hi = std::numeric_limits<double>::lowest(), y_hi = x_hi;
    for (const auto& s : series_) {
      for (double x : s.xs) x_hi = std::max(x_hi, x);
      for (double y : s.ys) y_hi = std::max(y_hi, y);
    }
    for (const auto& m : markers_) {
      x_hi = std::max(x_hi, m.x);
      y_hi = std::max(y_hi, m.y);
    }
    if (!(x_hi > x_lo)) x_hi = 1.0;
    if (!(y_hi > y_lo)) y_hi = 1.0;
    x_hi *= 1.05;
    y_hi *= 1.05;

    const double pw = width - left - right;
    const double ph = height - top - bottom;
    const auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
    const auto sy = [&](double y) { return top + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

    os << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
                      width, height, width, height)
       << '\n';
    os << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
    os << fmt::format(R"(<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>)", width / 2,
                      escape(title_))
       << '\n';
    os << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", left, top,
                      pw, ph)
       << '\n';

    for (int k = 0; k <= 5; ++k) {
      const double xv = x_lo + (x_hi - x_lo) * k / 5.0;
      const double yv = y_lo + (y_hi - y_lo) * k / 5.0;
      os << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="black"/>)", sx(xv),
                        top + ph, top + ph + 5)
         << '\n';
      os << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle" font-size="11">{:.3g}</text>)",
                        sx(xv), top + ph + 18, xv)
         << '\n';
      os << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{2:.2f}" y2="{1:.2f}" stroke="black"/>)", left - 5,
                        sy(yv), left)
         << '\n';
      os << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="end" font-size="11">{:.3g}</text>)", left - 8,
                        sy(yv) + 4, yv)
         << '\n';
    }
    os << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>)", left + pw / 2,
                      height - 15, escape(x_label_))
       << '\n';
    os << fmt::format(
              R"svg(<text x="18" y="{0}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {0})">{1}</text>)svg",
              top + ph / 2, escape(y_label_))
       << '\n';

    for (const auto& line : lines_) {
      // Clip y = slope * x to the plot box.
      const double x_end = std::min(x_hi, line.slope > 0.0 ? y_hi / line.slope : x_hi);
      os << fmt::format(
                R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="gray" stroke-dasharray="6,4"><title>{}</title></line>)",
                sx(0.0), sy(0.0), sx(x_end), sy(line.slope * x_end), escape(line.label))
         << '\n';
    }
    std::size_t legend_row = 0;
    for (const auto& s : series_) {
      os << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5" points=")", s.color);
      const std::size_t n = std::min(s.xs.size(), s.ys.size());
      for (std::size_t i = 0; i < n; ++i) os << fmt::format("{:.2f},{:.2f} ", sx(s.xs[i]), sy(s.ys[i]));
      os << "\"/>\n";
      const double ly = top + 16 + 16 * static_cast<double>(legend_row++);
      os << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)", left + 10, ly - 4,
                        left + 30, ly - 4, s.color)
         << '\n';
      os << fmt::format(R"(<text x="{}" y="{}" font-size="12">{}</text>)", left + 35, ly, escape(s.label)) << '\n';
    }
    for (const auto& m : markers_) {
      os << fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="5" fill="black"><title>{}</title></circle>)", sx(m.x),
                        sy(m.y), escape(m.label))
         << '\n';
    }
    os << "</svg>\n";
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  }

  struct Series {
    std::string label;
    std::vector<double> xs, ys;
    std::string color;
  };
  struct Line {
    double slope;
    std::string label;
  };
  struct Marker {
    double x, y;
    std::string label;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<Line> lines_;
  std::vector<Marker> markers_;
};

}  // namespace adiabat
