#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gpwells/asymptotics.hpp"

namespace gpwells {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // non-finite points are skipped
};

/// Static SVG line chart; a dashed horizontal guide is drawn at guide_y when finite.
std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series,
                          double guide_y);

/// Concentration points over the well outlines, in sweep order.
std::string svg_trajectory(const PotentialSpec& spec, const std::vector<SweepRecord>& records);

/// energy_ratio.svg, eps_ratio.svg and zbar.svg in dir.
void write_sweep_plots(const std::string& dir, const PotentialSpec& spec,
                       const std::vector<SweepRecord>& records);

}  // namespace gpwells
