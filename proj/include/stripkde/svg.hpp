#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stripkde {

struct ChartSeries
{
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct ChartSpec
{
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  //! Horizontal reference line (e.g. the limit 1), drawn when has_reference.
  double reference_y = 0.0;
  bool has_reference = false;
  std::vector<ChartSeries> series;
  //! Adds "<!-- generated ... -->" with the time; off for reproducible output.
  bool timestamp = false;
};

//! Minimal standalone SVG line chart.
std::string line_chart(const ChartSpec& spec);

} // namespace stripkde
