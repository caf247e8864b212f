#include "ccw/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ccw/types.hpp"

namespace ccw::plot {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
}

void y_axis(std::ostringstream& os, double lo, double hi) {
  const double plot_h = kHeight - kTop - kBottom;
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = kHeight - kBottom - plot_h * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      const double e = j < s.err.size() ? s.err[j] : 0.0;
      if (!std::isfinite(s.y[j])) continue;
      xmin = std::min(xmin, s.x[j]);
      xmax = std::max(xmax, s.x[j]);
      ymin = std::min(ymin, s.y[j] - e);
      ymax = std::max(ymax, s.y[j] + e);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + plot_w * (x - xmin) / (xmax - xmin); };
  auto py = [&](double y) { return kHeight - kBottom - plot_h * (y - ymin) / (ymax - ymin); };

  std::ostringstream os;
  header(os, title);
  y_axis(os, ymin, ymax);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (const auto& s : series) {
    for (double x : s.x)
      os << "<text x=\"" << px(x) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << x
         << "</text>\n";
    break;
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + plot_h / 2 << ")\">" << escape(y_label) << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j)
      if (std::isfinite(s.y[j])) os << px(s.x[j]) << ',' << py(s.y[j]) << ' ';
    os << "\"/>\n";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (!std::isfinite(s.y[j])) continue;
      os << "<circle cx=\"" << px(s.x[j]) << "\" cy=\"" << py(s.y[j]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      if (j < s.err.size() && s.err[j] > 0)
        os << "<line x1=\"" << px(s.x[j]) << "\" y1=\"" << py(s.y[j] - s.err[j]) << "\" x2=\"" << px(s.x[j])
           << "\" y2=\"" << py(s.y[j] + s.err[j]) << "\" stroke=\"" << color << "\"/>\n";
    }
    os << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 14 * (si + 1) << "\" text-anchor=\"end\" fill=\""
       << color << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& groups,
                          const std::vector<std::string>& bar_names, const std::vector<std::vector<double>>& bars) {
  double ymax = 0.0;
  for (const auto& g : bars)
    for (double v : g)
      if (std::isfinite(v)) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(bar_names.size(), 1));

  std::ostringstream os;
  header(os, title);
  y_axis(os, 0.0, ymax);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + group_w * static_cast<double>(g) + 0.1 * group_w;
    for (std::size_t b = 0; b < bar_names.size() && g < bars.size() && b < bars[g].size(); ++b) {
      const double v = std::isfinite(bars[g][b]) ? bars[g][b] : 0.0;
      const double h = plot_h * v / ymax;
      os << "<rect x=\"" << x0 + bar_w * static_cast<double>(b) << "\" y=\"" << kHeight - kBottom - h << "\" width=\""
         << bar_w * 0.95 << "\" height=\"" << h << "\" fill=\"" << kPalette[b % std::size(kPalette)] << "\"><title>"
         << escape(bar_names[b]) << ": " << v << "</title></rect>\n";
    }
    os << "<text x=\"" << x0 + 0.4 * group_w << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
       << escape(groups[g]) << "</text>\n";
  }
  for (std::size_t b = 0; b < bar_names.size(); ++b) {
    os << "<rect x=\"" << kWidth - kRight - 120 << "\" y=\"" << kTop + 14 * b << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[b % std::size(kPalette)] << "\"/>\n"
       << "<text x=\"" << kWidth - kRight - 104 << "\" y=\"" << kTop + 14 * b + 9 << "\">" << escape(bar_names[b])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace ccw::plot
