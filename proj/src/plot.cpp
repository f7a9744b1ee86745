#include "rlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rlab/errors.hpp"

namespace rlab {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 520.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Scale {
  double x_min, x_max, y_min, y_max;

  double x(double v) const {
    double t = (v - x_min) / (x_max - x_min);
    return kMarginLeft + t * (kWidth - kMarginLeft - kMarginRight);
  }
  double y(double v) const {
    double t = (v - y_min) / (y_max - y_min);
    return kHeight - kMarginBottom - t * (kHeight - kMarginTop - kMarginBottom);
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void render_curves_svg(const std::string& path, const std::string& title,
                       const std::vector<PlotSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const PlotSeries& s : series) {
    for (const CurvePoint& p : s.curve) {
      x_min = std::min(x_min, static_cast<double>(p.step));
      x_max = std::max(x_max, static_cast<double>(p.step));
      y_min = std::min(y_min, p.smoothed_mean - p.smoothed_half_std);
      y_max = std::max(y_max, p.smoothed_mean + p.smoothed_half_std);
    }
  }
  if (!(x_min < x_max)) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (!(y_min < y_max)) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min))
    throw NumericError("render_curves_svg: nothing to plot");
  double pad = 0.05 * (y_max - y_min);
  Scale sc{x_min, x_max, y_min - pad, y_max + pad};

  std::ofstream out(path);
  if (!out) throw NumericError("render_curves_svg: cannot open " + path);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"18\">" << title
      << "</text>\n";

  // Axes with a handful of ticks.
  double ax0 = sc.x(sc.x_min), ax1 = sc.x(sc.x_max);
  double ay0 = sc.y(sc.y_min), ay1 = sc.y(sc.y_max);
  out << "<line x1=\"" << ax0 << "\" y1=\"" << ay0 << "\" x2=\"" << ax1
      << "\" y2=\"" << ay0 << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ax0 << "\" y1=\"" << ay0 << "\" x2=\"" << ax0
      << "\" y2=\"" << ay1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = sc.x_min + (sc.x_max - sc.x_min) * i / 5.0;
    double fy = sc.y_min + (sc.y_max - sc.y_min) * i / 5.0;
    out << "<line x1=\"" << sc.x(fx) << "\" y1=\"" << ay0 << "\" x2=\""
        << sc.x(fx) << "\" y2=\"" << ay0 + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sc.x(fx) << "\" y=\"" << ay0 + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << num(fx) << "</text>\n";
    out << "<line x1=\"" << ax0 - 5 << "\" y1=\"" << sc.y(fy) << "\" x2=\""
        << ax0 << "\" y2=\"" << sc.y(fy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ax0 - 8 << "\" y=\"" << sc.y(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << (ax0 + ax1) / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">environment steps</text>\n";
  out << "<text x=\"18\" y=\"" << (ay0 + ay1) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 " << (ay0 + ay1) / 2
      << ")\">smoothed return</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& curve = series[s].curve;
    if (curve.empty()) continue;
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];

    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
        << "stroke=\"none\" points=\"";
    for (const CurvePoint& p : curve)
      out << num(sc.x(static_cast<double>(p.step))) << ","
          << num(sc.y(p.smoothed_mean + p.smoothed_half_std)) << " ";
    for (auto it = curve.rbegin(); it != curve.rend(); ++it)
      out << num(sc.x(static_cast<double>(it->step))) << ","
          << num(sc.y(it->smoothed_mean - it->smoothed_half_std)) << " ";
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const CurvePoint& p : curve)
      out << num(sc.x(static_cast<double>(p.step))) << ","
          << num(sc.y(p.smoothed_mean)) << " ";
    out << "\"/>\n";

    double lx = kMarginLeft + 12;
    double ly = kMarginTop + 8 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24
        << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw NumericError("render_curves_svg: write failed for " + path);
}

}  // namespace rlab
