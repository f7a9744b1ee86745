#pragma once

#include <string>
#include <vector>

#include "rlab/harness.hpp"

namespace rlab {

struct PlotSeries {
  std::string label;
  std::vector<CurvePoint> curve;
};

// Smoothed mean lines with half-std bands, one series per label.
// Throws NumericError if the file cannot be written.
void render_curves_svg(const std::string& path, const std::string& title,
                       const std::vector<PlotSeries>& series);

}  // namespace rlab
