#pragma once

// Minimal single-plot SVG writer: framed axes, tick labels and polylines.

#include <span>
#include <string>
#include <vector>

namespace oam {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string colour = "#1f4e9c";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

/// Throws std::invalid_argument for empty or mismatched series.
std::string render_svg(const PlotSpec& spec, std::span<const Series> series);

}  // namespace oam
