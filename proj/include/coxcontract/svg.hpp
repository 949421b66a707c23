#pragma once

// Self-contained SVG log-log line charts (inline styling, decade ticks).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coxcontract {

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), positive values plotted
};

inline void write_loglog_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                             const std::vector<SvgSeries>& series,
                             const std::vector<std::string>& comment_lines = {}) {
  constexpr int width = 640;
  constexpr int height = 440;
  constexpr int ml = 70, mr = 20, mt = 40, mb = 50;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (x <= 0.0 || y <= 0.0) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmin > xmax || ymin > ymax) {
    xmin = ymin = 0.1;
    xmax = ymax = 10.0;
  }
  if (xmin == xmax) xmax = xmin * 10.0;
  if (ymin == ymax) ymax = ymin * 10.0;
  const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  auto px = [&](double x) {
    return ml + (std::log10(x) - lx0) / (lx1 - lx0) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (std::log10(y) - ly0) / (ly1 - ly0) * (height - mt - mb);
  };

  for (const auto& c : comment_lines) os << "<!-- " << c << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "style=\"font:16px sans-serif\">" << title << "</text>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" style=\"font:12px sans-serif\">" << xlabel << "</text>\n";

  // axes box
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr << "\" height=\""
     << height - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // decade ticks
  for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
    const double x = std::pow(10.0, e);
    os << "<line x1=\"" << px(x) << "\" y1=\"" << mt << "\" x2=\"" << px(x) << "\" y2=\""
       << height - mb << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << height - mb + 16
       << "\" text-anchor=\"middle\" style=\"font:11px sans-serif\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double y = std::pow(10.0, e);
    os << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << width - mr << "\" y2=\""
       << py(y) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
       << "\" text-anchor=\"end\" style=\"font:11px sans-serif\">1e" << e << "</text>\n";
  }

  const std::vector<std::string> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::size_t idx = 0;
  for (const auto& s : series) {
    const std::string& color = palette[idx % palette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : s.points)
      if (x > 0.0 && y > 0.0) os << px(x) << "," << py(y) << " ";
    os << "\"/>\n";
    for (const auto& [x, y] : s.points)
      if (x > 0.0 && y > 0.0)
        os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
    os << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 18 + 16 * static_cast<int>(idx)
       << "\" text-anchor=\"end\" style=\"font:12px sans-serif\" fill=\"" << color << "\">"
       << s.name << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
}

}  // namespace coxcontract
