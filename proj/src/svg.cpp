#include "prs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "prs/errors.hpp"

namespace prs {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 480.0;
constexpr double kMargin = 40.0;

struct View {
  double min_x, max_x, min_y, max_y;

  double sx(double x) const {
    return kMargin + (x - min_x) / (max_x - min_x) * (kW - 2 * kMargin);
  }
  // SVG y grows downward.
  double sy(double y) const {
    return kH - kMargin - (y - min_y) / (max_y - min_y) * (kH - 2 * kMargin);
  }
};

std::ofstream open_svg(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  return out;
}

void close_svg(std::ofstream& out, const std::string& path) {
  out << "</svg>\n";
  if (!out) throw Error("write failed: " + path);
}

}  // namespace

void svg_overlay(const std::string& path, const std::vector<Point2>& points,
                 const ConvexQuad& quad) {
  View v{quad.vertices[0].x, quad.vertices[0].x, quad.vertices[0].y,
         quad.vertices[0].y};
  auto grow = [&](const Point2& p) {
    v.min_x = std::min(v.min_x, p.x);
    v.max_x = std::max(v.max_x, p.x);
    v.min_y = std::min(v.min_y, p.y);
    v.max_y = std::max(v.max_y, p.y);
  };
  for (const auto& p : quad.vertices) grow(p);
  for (const auto& p : points) grow(p);
  double pad_x = std::max(1e-9, 0.05 * (v.max_x - v.min_x));
  double pad_y = std::max(1e-9, 0.05 * (v.max_y - v.min_y));
  v.min_x -= pad_x; v.max_x += pad_x;
  v.min_y -= pad_y; v.max_y += pad_y;

  std::ofstream out = open_svg(path);
  out << "<polygon points=\"";
  for (const auto& p : quad.vertices) out << v.sx(p.x) << "," << v.sy(p.y) << " ";
  out << "\" fill=\"#4a90d9\" fill-opacity=\"0.2\" stroke=\"#1b4f8a\" "
         "stroke-width=\"2\"/>\n";
  for (const auto& p : points) {
    out << "<circle cx=\"" << v.sx(p.x) << "\" cy=\"" << v.sy(p.y)
        << "\" r=\"2.5\" fill=\"#c0392b\"/>\n";
  }
  close_svg(out, path);
}

void svg_bar_chart(const std::string& path,
                   const std::vector<std::string>& labels,
                   const std::vector<double>& values,
                   const std::string& title) {
  if (labels.size() != values.size() || values.empty()) {
    throw ConfigError("svg_bar_chart: labels/values size mismatch");
  }
  double vmax = *std::max_element(values.begin(), values.end());
  if (vmax <= 0.0) vmax = 1.0;

  std::ofstream out = open_svg(path);
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << title << "</text>\n";
  double slot = (kW - 2 * kMargin) / double(values.size());
  double bar_w = slot * 0.7;
  for (size_t i = 0; i < values.size(); ++i) {
    double h = values[i] / vmax * (kH - 2 * kMargin);
    double x = kMargin + double(i) * slot + (slot - bar_w) / 2;
    out << "<rect x=\"" << x << "\" y=\"" << kH - kMargin - h << "\" width=\""
        << bar_w << "\" height=\"" << h << "\" fill=\"#4a90d9\"/>\n";
    out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << kH - kMargin + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << labels[i]
        << "</text>\n";
  }
  close_svg(out, path);
}

void svg_histogram(const std::string& path, const std::vector<double>& values,
                   int n_bins, const std::string& title) {
  if (values.empty() || n_bins < 1) {
    throw ConfigError("svg_histogram: empty values or bad bin count");
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi <= lo) hi = lo + 1.0;
  std::vector<long> counts(size_t(n_bins), 0);
  for (double x : values) {
    int b = int((x - lo) / (hi - lo) * n_bins);
    b = std::clamp(b, 0, n_bins - 1);
    ++counts[size_t(b)];
  }
  long cmax = *std::max_element(counts.begin(), counts.end());

  std::ofstream out = open_svg(path);
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << title << "</text>\n";
  double slot = (kW - 2 * kMargin) / double(n_bins);
  for (int i = 0; i < n_bins; ++i) {
    double h = double(counts[size_t(i)]) / double(cmax) * (kH - 2 * kMargin);
    out << "<rect x=\"" << kMargin + i * slot << "\" y=\"" << kH - kMargin - h
        << "\" width=\"" << slot << "\" height=\"" << h
        << "\" fill=\"#4a90d9\" stroke=\"#ffffff\"/>\n";
  }
  close_svg(out, path);
}

}  // namespace prs
