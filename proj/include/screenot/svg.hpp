#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "screenot/errors.hpp"
#include "screenot/io.hpp"

namespace screenot::svg {

/// Minimal self-contained SVG line chart. CSV files are the authoritative
/// experiment artifacts; these plots exist for quick eyeballing only.
class LineChart {
 public:
  LineChart(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add_series(const std::string& name, std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size()) throw ConstraintError("LineChart: x/y size mismatch");
    series_.push_back({name, std::move(xs), std::move(ys)});
  }

  void add_vline(const std::string& name, double x) { vlines_.push_back({name, x}); }

  void write(const std::string& path) const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        xmin = std::min(xmin, s.xs[i]);
        xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]);
        ymax = std::max(ymax, s.ys[i]);
      }
    for (const auto& v : vlines_) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << " " << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title_
        << "</text>\n";
    out << "<rect x='" << ml << "' y='" << mt << "' width='" << w - ml - mr << "' height='"
        << h - mt - mb << "' fill='none' stroke='black'/>\n";
    out << "<text x='" << w / 2 << "' y='" << h - 12 << "' text-anchor='middle' font-size='12'>"
        << xlabel_ << "</text>\n";
    out << "<text x='16' y='" << h / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
        << h / 2 << ")'>" << ylabel_ << "</text>\n";
    // corner tick labels
    out << "<text x='" << ml << "' y='" << h - mb + 16 << "' font-size='10'>"
        << io::format_double(xmin) << "</text>\n";
    out << "<text x='" << w - mr << "' y='" << h - mb + 16
        << "' text-anchor='end' font-size='10'>" << io::format_double(xmax) << "</text>\n";
    out << "<text x='" << ml - 4 << "' y='" << h - mb << "' text-anchor='end' font-size='10'>"
        << io::format_double(ymin) << "</text>\n";
    out << "<text x='" << ml - 4 << "' y='" << mt + 10 << "' text-anchor='end' font-size='10'>"
        << io::format_double(ymax) << "</text>\n";

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    int ci = 0;
    double legend_y = mt + 14;
    for (const auto& s : series_) {
      const char* color = colors[ci++ % 5];
      out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        out << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
      out << "'/>\n";
      out << "<text x='" << w - mr - 6 << "' y='" << legend_y
          << "' text-anchor='end' font-size='11' fill='" << color << "'>" << s.name
          << "</text>\n";
      legend_y += 14;
    }
    for (const auto& v : vlines_) {
      out << "<line x1='" << px(v.x) << "' y1='" << mt << "' x2='" << px(v.x) << "' y2='"
          << h - mb << "' stroke='gray' stroke-dasharray='4 3'/>\n";
      out << "<text x='" << px(v.x) + 3 << "' y='" << mt + 12 << "' font-size='10' fill='gray'>"
          << v.name << "</text>\n";
    }
    out << "</svg>\n";
  }

 private:
  struct Series {
    std::string name;
    std::vector<double> xs, ys;
  };
  struct VLine {
    std::string name;
    double x;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<VLine> vlines_;
};

}  // namespace screenot::svg
