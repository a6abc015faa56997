// Minimal SVG emitters for overlays and report plots.
#pragma once

#include <string>
#include <vector>

#include "prs/geometry.hpp"

namespace prs {

// Sample points as circle markers plus exactly one polygon for the quad.
void svg_overlay(const std::string& path, const std::vector<Point2>& points,
                 const ConvexQuad& quad);

// One rect per value; labels render under the bars.
void svg_bar_chart(const std::string& path,
                   const std::vector<std::string>& labels,
                   const std::vector<double>& values,
                   const std::string& title);

// One rect per bin.
void svg_histogram(const std::string& path, const std::vector<double>& values,
                   int n_bins, const std::string& title);

}  // namespace prs
