#include "prs/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace prs {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double coord_scale(const std::array<Point2, 4>& pts) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max({m, std::abs(p.x), std::abs(p.y)});
  return std::max(m, 1e-300);
}

}  // namespace

ConvexQuad canonicalize(const std::array<Point2, 4>& pts) {
  for (const auto& p : pts) {
    if (!finite(p)) throw DegenerateQuad("canonicalize: non-finite vertex");
  }
  Point2 c{(pts[0].x + pts[1].x + pts[2].x + pts[3].x) / 4.0,
           (pts[0].y + pts[1].y + pts[2].y + pts[3].y) / 4.0};
  std::array<Point2, 4> v = pts;
  std::sort(v.begin(), v.end(), [&](const Point2& a, const Point2& b) {
    double aa = std::atan2(a.y - c.y, a.x - c.x);
    double ab = std::atan2(b.y - c.y, b.x - c.x);
    if (aa != ab) return aa < ab;
    double da = std::hypot(a.x - c.x, a.y - c.y);
    double db = std::hypot(b.x - c.x, b.y - c.y);
    return da < db;
  });
  // Strict left turns at every corner; anything else means the hull of the
  // four points has fewer than 4 vertices.
  double s = coord_scale(pts);
  double eps = 1e-12 * s * s;
  for (int i = 0; i < 4; ++i) {
    if (cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]) <= eps) {
      throw DegenerateQuad("canonicalize: hull of 4 points is degenerate");
    }
  }
  return ConvexQuad{v};
}

bool contains(const ConvexQuad& q, const Point2& p) {
  double s = coord_scale(q.vertices);
  s = std::max({s, std::abs(p.x), std::abs(p.y)});
  double eps = 1e-12 * s * s;
  for (int i = 0; i < 4; ++i) {
    if (cross(q.vertices[i], q.vertices[(i + 1) % 4], p) < -eps) return false;
  }
  return true;
}

double area(const ConvexQuad& q) {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point2& u = q.vertices[i];
    const Point2& v = q.vertices[(i + 1) % 4];
    a += u.x * v.y - v.x * u.y;
  }
  return std::abs(a) / 2.0;
}

NormalizationFrame fit_frame(const SampleSet& s) {
  if (s.points.size() < 2) throw DegenerateFrame("fit_frame: need >= 2 points");
  NormalizationFrame f{s.points[0].x, s.points[0].x, s.points[0].y,
                       s.points[0].y};
  for (const auto& p : s.points) {
    if (!finite(p)) throw DegenerateFrame("fit_frame: non-finite point");
    f.min_x = std::min(f.min_x, p.x);
    f.max_x = std::max(f.max_x, p.x);
    f.min_y = std::min(f.min_y, p.y);
    f.max_y = std::max(f.max_y, p.y);
  }
  if (!(f.max_x > f.min_x) || !(f.max_y > f.min_y)) {
    throw DegenerateFrame("fit_frame: zero range on one axis");
  }
  return f;
}

Point2 normalize(const Point2& p, const NormalizationFrame& f) {
  return {(p.x - f.min_x) / f.width(), (p.y - f.min_y) / f.height()};
}

Point2 denormalize(const Point2& p, const NormalizationFrame& f) {
  return {p.x * f.width() + f.min_x, p.y * f.height() + f.min_y};
}

ConvexQuad normalize(const ConvexQuad& q, const NormalizationFrame& f) {
  std::array<Point2, 4> v;
  for (int i = 0; i < 4; ++i) v[i] = normalize(q.vertices[i], f);
  return canonicalize(v);
}

ConvexQuad denormalize(const ConvexQuad& q, const NormalizationFrame& f) {
  std::array<Point2, 4> v;
  for (int i = 0; i < 4; ++i) v[i] = denormalize(q.vertices[i], f);
  return canonicalize(v);
}

}  // namespace prs
