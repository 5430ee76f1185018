#include "stripkde/svg.hpp"

#include "stripkde/format.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stripkde {

namespace {

constexpr double W = 640, H = 420, ML = 70, MR = 20, MT = 40, MB = 55;
const char* const kColors[] = { "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e" };

std::string
escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string
num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string
tick_label(double v, bool log)
{
  double shown = log ? std::pow(10.0, v) : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", shown);
  return buf;
}

} // namespace

std::string
line_chart(const ChartSpec& spec)
{
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series)
    for (auto [x, y] : s.points) {
      if ((spec.log_x && !(x > 0.0)) || (spec.log_y && !(y > 0.0)) || !std::isfinite(x) ||
          !std::isfinite(y))
        continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  if (spec.has_reference && std::isfinite(spec.reference_y)) {
    y0 = std::min(y0, ty(spec.reference_y));
    y1 = std::max(y1, ty(spec.reference_y));
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 == x0)
    x1 = x0 + 1.0;
  if (y1 == y0)
    y1 = y0 + 1.0;
  double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ML + (tx(x) - x0) / (x1 - x0) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (ty(y) - y0) / (y1 - y0) * (H - MT - MB); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (spec.timestamp) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    os << "<!-- generated at unix time "
       << std::chrono::duration_cast<std::chrono::seconds>(now).count() << " -->\n";
  }
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(spec.title) << "</text>\n";
  // axes and ticks
  os << "<g stroke=\"#333\" fill=\"none\"><line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\""
     << W - MR << "\" y2=\"" << H - MB << "\"/><line x1=\"" << ML << "\" y1=\"" << MT
     << "\" x2=\"" << ML << "\" y2=\"" << H - MB << "\"/></g>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    double X = ML + (W - ML - MR) * i / 4.0, Y = H - MB - (H - MT - MB) * i / 4.0;
    os << "<text x=\"" << num(X) << "\" y=\"" << H - MB + 16 << "\" text-anchor=\"middle\">"
       << tick_label(xv, spec.log_x) << "</text>\n";
    os << "<text x=\"" << ML - 6 << "\" y=\"" << num(Y + 4) << "\" text-anchor=\"end\">"
       << tick_label(yv, spec.log_y) << "</text>\n";
  }
  os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (MT + H - MB) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";
  if (spec.has_reference && std::isfinite(spec.reference_y))
    os << "<line x1=\"" << ML << "\" x2=\"" << W - MR << "\" y1=\"" << num(py(spec.reference_y))
       << "\" y2=\"" << num(py(spec.reference_y))
       << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    const char* color = kColors[s % std::size(kColors)];
    std::string path;
    for (auto [x, y] : ser.points) {
      if ((spec.log_x && !(x > 0.0)) || (spec.log_y && !(y > 0.0)) || !std::isfinite(y))
        continue;
      path += (path.empty() ? "M" : " L") + num(px(x)) + "," + num(py(y));
      os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    if (!path.empty())
      os << "<path d=\"" << path << "\" stroke=\"" << color << "\" fill=\"none\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << W - MR - 150 << "\" y=\"" << MT + 14 + 16 * s << "\" fill=\"" << color
       << "\">" << escape(ser.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace stripkde
