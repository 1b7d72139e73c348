#include "mmue/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "mmue/error.hpp"

namespace mmue::plot {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr int kLeft = 78, kRight = 170, kTop = 40, kBottom = 56;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// 1-2-5 tick step giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{:.4g}", v);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string render_svg(const Axes& axes, const std::vector<Series>& series) {
  if (series.empty()) throw InvalidArgument("plot: no series");
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) throw InvalidArgument(fmt::format("plot: series '{}' is empty or ragged", s.label));
    if (!s.err.empty() && s.err.size() != s.y.size()) throw InvalidArgument(fmt::format("plot: series '{}' error bars are ragged", s.label));
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = s.err.empty() ? 0.0 : s.err[i];
      double lo = s.y[i] - e, hi = s.y[i] + e;
      if (axes.log_y) {
        if (!(s.y[i] > 0.0)) continue;
        if (lo <= 0.0) lo = s.y[i];
        lo = std::log10(lo);
        hi = std::log10(hi);
      }
      xr.add(s.x[i]);
      yr.add(lo);
      yr.add(hi);
    }
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) throw InvalidArgument("plot: nothing to draw");
  xr.pad();
  if (axes.log_y) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::ceil(yr.hi);
  }
  yr.pad();

  const double pw = axes.width - kLeft - kRight;
  const double ph = axes.height - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) {
    const double v = axes.log_y ? std::log10(y) : y;
    return kTop + (yr.hi - v) / (yr.hi - yr.lo) * ph;
  };
  auto pyl = [&](double v) { return kTop + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      axes.width, axes.height, axes.width, axes.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", axes.width, axes.height);
  out += fmt::format("<text x=\"{:.2f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kLeft + pw / 2, escape(axes.title));

  // Grid and ticks.
  const double xstep = nice_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xstep - 1e-9) * xstep; t <= xr.hi + 1e-9 * xstep; t += xstep) {
    const double x = px(t);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#e0e0e0\"/>\n", x, kTop, x, kTop + ph);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x, kTop + ph + 16,
                       tick_label(std::abs(t) < 1e-12 * xstep ? 0.0 : t));
  }
  if (axes.log_y) {
    for (double d = yr.lo; d <= yr.hi + 1e-9; d += 1.0) {
      const double y = pyl(d);
      out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#e0e0e0\"/>\n", kLeft, y, kLeft + pw, y);
      out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", kLeft - 6, y + 4,
                         static_cast<int>(std::lround(d)));
    }
  } else {
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    for (double t = std::ceil(yr.lo / ystep - 1e-9) * ystep; t <= yr.hi + 1e-9 * ystep; t += ystep) {
      const double y = pyl(t);
      out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#e0e0e0\"/>\n", kLeft, y, kLeft + pw, y);
      out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, y + 4,
                         tick_label(std::abs(t) < 1e-12 * ystep ? 0.0 : t));
    }
  }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     axes.height - 14, escape(axes.x_label));
  out += fmt::format("<text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
                     kTop + ph / 2, kTop + ph / 2, escape(axes.y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const char* dash = s.dashed ? " stroke-dasharray=\"6 4\"" : "";
    std::string pts;
    std::size_t drawn = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (axes.log_y && !(s.y[i] > 0.0)) continue;
      pts += fmt::format("{}{:.2f},{:.2f}", drawn ? " " : "", px(s.x[i]), py(s.y[i]));
      ++drawn;
    }
    out += fmt::format("<g class=\"series\" data-label=\"{}\">\n", escape(s.label));
    if (drawn > 1)
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", pts, color, dash);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (axes.log_y && !(s.y[i] > 0.0)) continue;
      const double x = px(s.x[i]);
      if (!s.err.empty() && s.err[i] > 0.0) {
        double lo = s.y[i] - s.err[i];
        if (axes.log_y && lo <= 0.0) lo = s.y[i];
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", x, py(lo), x,
                           py(s.y[i] + s.err[i]), color);
      }
      out += fmt::format("<circle class=\"marker\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", x, py(s.y[i]), color);
    }
    out += "</g>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 12;
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n",
                       lx, ly, lx + 22, ly, color, dash);
    out += fmt::format("<text class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 28, ly + 4, escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const Axes& axes, const std::vector<Series>& series) {
  const std::string doc = render_svg(axes, series);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
  out << doc;
}

}  // namespace mmue::plot
