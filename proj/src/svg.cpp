#include "oam/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace oam {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, std::span<const Series> series) {
  if (series.empty()) throw std::invalid_argument("render_svg: no series");
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: empty or mismatched series");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (x1 == x0) x1 = x0 + 1.0;
  // Rates are plotted from zero so the dip depth reads off directly.
  y0 = std::min(y0, 0.0);
  if (y1 == y0) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);

  const double left = 70;
  const double right = spec.width - 20.0;
  const double top = 40;
  const double bottom = spec.height - 50.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
  auto py = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(spec.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";
  out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(right - left) + "\" height=\"" +
         fmt(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x0 + (x1 - x0) * i / kTicks;
    const double yv = y0 + (y1 - y0) * i / kTicks;
    out += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" + fmt(px(xv)) + "\" y2=\"" +
           fmt(bottom + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(bottom + 18) + "\" text-anchor=\"middle\">" +
           fmt(xv, "%.3g") + "</text>\n";
    out += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
           fmt(py(yv)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" +
           fmt(yv, "%.3g") + "</text>\n";
  }
  out += "<text x=\"" + fmt((left + right) / 2) + "\" y=\"" + fmt(spec.height - 12.0) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + fmt((top + bottom) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(spec.y_label) + "</text>\n";

  double legend_y = top + 16;
  for (const auto& s : series) {
    out += "<polyline fill=\"none\" stroke=\"" + escape(s.colour) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out += ' ';
      out += fmt(px(s.x[i]), "%.2f") + "," + fmt(py(s.y[i]), "%.2f");
    }
    out += "\"/>\n";
    if (!s.name.empty()) {
      out += "<text x=\"" + fmt(right - 8) + "\" y=\"" + fmt(legend_y) + "\" text-anchor=\"end\" fill=\"" +
             escape(s.colour) + "\">" + escape(s.name) + "</text>\n";
      legend_y += 16;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace oam
