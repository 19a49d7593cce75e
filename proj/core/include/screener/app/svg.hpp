#pragma once

#include <span>
#include <string>
#include <vector>

#include "screener/convexgrid.hpp"

// Small self-contained SVG writers. Numbers are printed with fixed precision
// so identical data gives identical files.

namespace screener::app {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

/// Filled level bands of a 2-d grid function with `levels` equal steps.
std::string level_sets(const GridDomain& domain, std::span<const double> values,
                       const std::string& title, int levels = 12);

}  // namespace screener::app
