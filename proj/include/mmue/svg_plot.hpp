#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mmue::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-width of an error bar per point
  bool dashed = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Line chart with one polyline and one marker per point for each series.
/// Output depends only on the inputs. On a log axis, points with y <= 0 are
/// left out. Throws InvalidArgument if there is no series or a series is empty.
std::string render_svg(const Axes& axes, const std::vector<Series>& series);

void write_svg(const std::filesystem::path& path, const Axes& axes, const std::vector<Series>& series);

}  // namespace mmue::plot
