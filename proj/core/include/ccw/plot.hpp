#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ccw::plot {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

// One group per entry of `groups`; bars[g][b] is the height of bar b in group g.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& groups,
                          const std::vector<std::string>& bar_names, const std::vector<std::vector<double>>& bars);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ccw::plot
