#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace consensusflow {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal static SVG line chart (fixed 860x520 canvas, axes with a handful
// of ticks, one polyline per series, legend from the series labels). Purely
// presentational: a deterministic function of its inputs with no external
// dependencies; the CSV next to it remains the ground-truth artifact.
void write_line_chart(std::ostream& out, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<ChartSeries>& series);

}  // namespace consensusflow
