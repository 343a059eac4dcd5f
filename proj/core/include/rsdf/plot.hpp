#pragma once

#include <string>
#include <vector>

namespace rsdf {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // same length as x, >= 2 points
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 800;
  int height = 560;
  bool log_y = false;
};

// Raster line plot with axes, tick labels, and a legend (one entry per
// series). Throws on no series, mismatched x/y, or a series with < 2 points.
void write_plot_png(const PlotSpec& spec, const std::string& path);

// Same plot as vector output.
void write_plot_svg(const PlotSpec& spec, const std::string& path);

}  // namespace rsdf
