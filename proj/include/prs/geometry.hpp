// 2D primitives: points, convex quads, containment, areas, min-max frames.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "prs/errors.hpp"

namespace prs {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool finite(const Point2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

struct SampleSet {
  std::vector<Point2> points;
  std::string provenance;  // optional distribution identifier

  size_t size() const { return points.size(); }
};

// Four vertices in canonical order: counterclockwise, starting at the vertex
// with the smallest centroid angle in [0, 2pi), ties broken by smaller
// centroid distance. Construct via canonicalize().
struct ConvexQuad {
  std::array<Point2, 4> vertices;
};

struct NormalizationFrame {
  double min_x, max_x, min_y, max_y;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

// Reorders 4 points into canonical CCW order. Throws DegenerateQuad if the
// convex hull of the points has fewer than 4 vertices (any point inside or
// on an edge of the hull of the others).
ConvexQuad canonicalize(const std::array<Point2, 4>& pts);

// Boundary-inclusive containment.
bool contains(const ConvexQuad& q, const Point2& p);

// Shoelace area, strictly positive for a valid quad.
double area(const ConvexQuad& q);

// Coordinate-wise min/max of the points. Throws DegenerateFrame if all x or
// all y coincide.
NormalizationFrame fit_frame(const SampleSet& s);

// Maps frame corners to (0,0) and (1,1). Points outside the frame map
// outside [0,1]; that is intentional.
Point2 normalize(const Point2& p, const NormalizationFrame& f);
Point2 denormalize(const Point2& p, const NormalizationFrame& f);

ConvexQuad normalize(const ConvexQuad& q, const NormalizationFrame& f);
ConvexQuad denormalize(const ConvexQuad& q, const NormalizationFrame& f);

}  // namespace prs
