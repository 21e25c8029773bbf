#pragma once

#include <string>
#include <vector>

namespace hjbd {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::string note;  // extra annotation line under the title
};

/// Standalone SVG document with one polyline per series (markers and error
/// bars when err is filled).
std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Empirical order between successive ladder entries: log(e_i/e_{i+1}) / log(h_i/h_{i+1}).
std::vector<double> empirical_orders(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace hjbd
