#include "screener/app/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "screener/errors.hpp"

namespace screener::app {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                          "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

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

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" +
         num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-300 * (1.0 + std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::array<int, 3> band_color(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                          {59, 82, 139},
                                                          {33, 145, 140},
                                                          {94, 201, 98},
                                                          {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  int i = std::min(static_cast<int>(t), 3);
  double f = t - i;
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const ChartOptions& o) {
  auto tx = [&](double v) { return o.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return o.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!o.log_x || x > 0.0) && (!o.log_y || y > 0.0);
  };
  Range rx, ry;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      rx.add(tx(s.x[i]));
      ry.add(ty(s.y[i]));
    }
  }
  rx.finish();
  ry.finish();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string svg = header(o.title);
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double fx = rx.lo + (rx.hi - rx.lo) * k / 4.0;
    double fy = ry.lo + (ry.hi - ry.lo) * k / 4.0;
    double sx = kLeft + pw * k / 4.0;
    double sy = kTop + ph - ph * k / 4.0;
    double lx = o.log_x ? std::pow(10.0, fx) : fx;
    double ly = o.log_y ? std::pow(10.0, fy) : fy;
    svg += "<text x=\"" + num(sx) + "\" y=\"" + num(kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + tick(lx) + "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy + 4) + "\" text-anchor=\"end\">" +
           tick(ly) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\">" + escape(o.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(o.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % kPalette.size()];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      if (s.markers) {
        svg += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
      } else {
        pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      }
    }
    if (!pts.empty()) {
      pts.pop_back();
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    double ly = kTop + 14 + 18.0 * static_cast<double>(si);
    svg += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly - 9) +
           "\" width=\"12\" height=\"10\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 30) + "\" y=\"" + num(ly) + "\">" +
           escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string level_sets(const GridDomain& domain, std::span<const double> values,
                       const std::string& title, int levels) {
  if (domain.dim != 2) throw InvalidArgument("level_sets needs a 2-d grid");
  if (values.size() != domain.size()) throw InvalidArgument("level_sets: size mismatch");
  levels = std::max(levels, 2);
  Range r;
  for (double v : values)
    if (std::isfinite(v)) r.add(v);
  r.finish();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double side = std::min(pw, ph);
  const int n0 = domain.nodes[0], n1 = domain.nodes[1];
  const double cw = side / n0, chh = side / n1;

  std::string svg = header(title);
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto m = domain.multi_index(k);
    double t = (values[k] - r.lo) / (r.hi - r.lo);
    int band = std::min(static_cast<int>(t * levels), levels - 1);
    auto c = band_color((band + 0.5) / levels);
    char fill[16];
    std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", c[0], c[1], c[2]);
    svg += "<rect x=\"" + num(kLeft + m[0] * cw) + "\" y=\"" + num(kTop + (n1 - 1 - m[1]) * chh) +
           "\" width=\"" + num(cw + 0.05) + "\" height=\"" + num(chh + 0.05) + "\" fill=\"" + fill +
           "\"/>\n";
  }
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(side) +
         "\" height=\"" + num(side) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kTop + side + 16) + "\">" +
         tick(domain.lower[0]) + "</text>\n";
  svg += "<text x=\"" + num(kLeft + side) + "\" y=\"" + num(kTop + side + 16) +
         "\" text-anchor=\"end\">" + tick(domain.upper[0]) + "</text>\n";
  svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kTop + side) + "\" text-anchor=\"end\">" +
         tick(domain.lower[1]) + "</text>\n";
  svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(kTop + 10) + "\" text-anchor=\"end\">" +
         tick(domain.upper[1]) + "</text>\n";
  const double lx = kLeft + side + 24;
  for (int b = 0; b < levels; ++b) {
    auto c = band_color((b + 0.5) / levels);
    char fill[16];
    std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", c[0], c[1], c[2]);
    double y = kTop + side - (b + 1) * side / levels;
    svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(y) + "\" width=\"14\" height=\"" +
           num(side / levels) + "\" fill=\"" + fill + "\"/>\n";
  }
  svg += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(kTop + side) + "\">" + tick(r.lo) +
         "</text>\n";
  svg += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(kTop + 10) + "\">" + tick(r.hi) +
         "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace screener::app
