#include "hjbd/plots.hpp"

#include "hjbd/common.hpp"
#include "hjbd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjbd {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((spec.logx && s.x[i] <= 0.0) || (spec.logy && s.y[i] <= 0.0)) continue;
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      const double lo = spec.logy ? ty(std::max(s.y[i] - e, s.y[i] * 0.5)) : ty(s.y[i] - e);
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, ty(s.y[i] + e));
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
      << "</text>\n";
  if (!spec.note.empty()) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"38\" text-anchor=\"middle\">" << escape(spec.note) << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0, fy = ymin + (ymax - ymin) * k / 4.0;
    const double gx = kLeft + pw * k / 4.0, gy = kTop + ph - ph * k / 4.0;
    out << "<text x=\"" << gx << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
        << num(spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
        << num(spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << escape(spec.xlabel) << "</text>\n";
  out << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.ylabel) << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % 6];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((spec.logx && s.x[i] <= 0.0) || (spec.logy && s.y[i] <= 0.0)) continue;
      pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      if (i < s.err.size() && s.err[i] > 0.0) {
        const double lo = spec.logy ? std::max(s.y[i] - s.err[i], s.y[i] * 0.5) : s.y[i] - s.err[i];
        out << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(s.x[i]) << "\" y2=\""
            << py(s.y[i] + s.err[i]) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
        << "\"/>\n";
    out << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 14 * si << "\" fill=\"" << color << "\">"
        << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "slope fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  require(denom != 0.0, "slope fit needs distinct x values");
  return (n * sxy - sx * sy) / denom;
}

std::vector<double> empirical_orders(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < h.size() && i + 1 < err.size(); ++i) {
    out.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
  }
  return out;
}

}  // namespace hjbd
