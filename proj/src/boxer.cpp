#include "prs/boxer.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "prs/errors.hpp"

namespace prs {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidAlpha("alpha must lie in (0, 1)");
  }
}

// (n+1) x (n+1) inclusive prefix sums.
std::vector<double> prefix_sums(const GridDensity& g) {
  int n = g.n;
  std::vector<double> p(size_t(n + 1) * (n + 1), 0.0);
  auto P = [&](int i, int j) -> double& { return p[size_t(i) * (n + 1) + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      P(i + 1, j + 1) = g.at(i, j) + P(i, j + 1) + P(i + 1, j) - P(i, j);
    }
  }
  return p;
}

double box_sum(const std::vector<double>& p, int n, const GridBox& b) {
  auto P = [&](int i, int j) { return p[size_t(i) * (n + 1) + j]; };
  return P(b.r_max + 1, b.c_max + 1) - P(b.r_min, b.c_max + 1) -
         P(b.r_max + 1, b.c_min) + P(b.r_min, b.c_min);
}

struct Cell {
  double w;
  int i, j;
  // max-heap on weight, ties toward the smallest (row, col)
  bool operator<(const Cell& o) const {
    if (w != o.w) return w < o.w;
    if (i != o.i) return i > o.i;
    return j > o.j;
  }
};

}  // namespace

double box_mass_fraction(const GridDensity& g, const GridBox& box) {
  double acc = 0.0, c = 0.0;
  for (int i = box.r_min; i <= box.r_max; ++i) {
    for (int j = box.c_min; j <= box.c_max; ++j) {
      double y = g.at(i, j) - c;
      double t = acc + y;
      c = (t - acc) - y;
      acc = t;
    }
  }
  return acc / g.total_mass();
}

ConvexQuad box_to_quad(const GridBox& box, const GridDensity& g) {
  double x0 = g.origin.x + box.c_min * g.cell_w;
  double x1 = g.origin.x + (box.c_max + 1) * g.cell_w;
  double y0 = g.origin.y + box.r_min * g.cell_h;
  double y1 = g.origin.y + (box.r_max + 1) * g.cell_h;
  return canonicalize({Point2{x0, y0}, Point2{x1, y0}, Point2{x1, y1},
                       Point2{x0, y1}});
}

BoxResult ilp_heuristic(const GridDensity& g, double alpha) {
  check_alpha(alpha);
  int n = g.n;
  double total = g.total_mass();
  if (!(total > 0.0)) throw Error("ilp_heuristic: zero total mass");
  std::vector<double> pfx = prefix_sums(g);

  std::priority_queue<Cell> heap;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) heap.push({g.at(i, j), i, j});
  }

  GridBox box{heap.top().i, heap.top().i, heap.top().j, heap.top().j};
  double threshold = alpha * total;
  double box_mass = 0.0;  // z starts all-zero
  long iterations = 0;

  while (true) {
    while (box_mass < threshold && !heap.empty()) {
      Cell c = heap.top();
      heap.pop();
      box.r_min = std::min(box.r_min, c.i);
      box.r_max = std::max(box.r_max, c.i);
      box.c_min = std::min(box.c_min, c.j);
      box.c_max = std::max(box.c_max, c.j);
      box_mass = box_sum(pfx, n, box);
      ++iterations;
    }
    // Guard against prefix-sum round-off at the threshold.
    double direct = box_mass_fraction(g, box);
    if (direct >= alpha || heap.empty()) {
      BoxResult res;
      res.box = box;
      res.quad = box_to_quad(box, g);
      res.grid_mass_fraction = direct;
      res.iterations = iterations;
      return res;
    }
    box_mass = 0.0;  // force at least one more expansion
  }
}

BoxResult bounding_box(const GridDensity& g, double alpha) {
  check_alpha(alpha);
  int n = g.n;
  double total = g.total_mass();
  if (!(total > 0.0)) throw Error("bounding_box: zero total mass");

  std::vector<Cell> cells;
  cells.reserve(size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cells.push_back({g.at(i, j), i, j});
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return b < a; });

  GridBox box{n, -1, n, -1};
  double acc = 0.0;
  long used = 0;
  for (const Cell& c : cells) {
    box.r_min = std::min(box.r_min, c.i);
    box.r_max = std::max(box.r_max, c.i);
    box.c_min = std::min(box.c_min, c.j);
    box.c_max = std::max(box.c_max, c.j);
    acc += c.w;
    ++used;
    if (acc >= alpha * total) break;
  }

  BoxResult res;
  res.box = box;
  res.quad = box_to_quad(box, g);
  res.grid_mass_fraction = box_mass_fraction(g, box);
  res.iterations = used;
  return res;
}

BoxResult optimal_box(const GridDensity& g, double alpha) {
  check_alpha(alpha);
  int n = g.n;
  if (n > 64) throw GridTooLarge("optimal_box: n > 64");
  double total = g.total_mass();
  if (!(total > 0.0)) throw Error("optimal_box: zero total mass");
  std::vector<double> pfx = prefix_sums(g);
  double threshold = alpha * total;

  bool found = false;
  GridBox best{};
  long best_cells = long(n) * n + 1;
  long scanned = 0;

  for (int r1 = 0; r1 < n; ++r1) {
    for (int r2 = r1; r2 < n; ++r2) {
      for (int c1 = 0; c1 < n; ++c1) {
        for (int c2 = c1; c2 < n; ++c2) {
          GridBox b{r1, r2, c1, c2};
          ++scanned;
          if (box_sum(pfx, n, b) < threshold) continue;
          long cells = b.cells();
          bool better =
              !found || cells < best_cells ||
              (cells == best_cells &&
               std::tie(b.r_min, b.c_min, b.r_max, b.c_max) <
                   std::tie(best.r_min, best.c_min, best.r_max, best.c_max));
          if (better && box_mass_fraction(g, b) >= alpha) {
            best = b;
            best_cells = cells;
            found = true;
          }
          break;  // wider boxes on this (r1, r2, c1) are never smaller
        }
      }
    }
  }
  if (!found) {
    best = GridBox{0, n - 1, 0, n - 1};  // full grid always qualifies
  }
  BoxResult res;
  res.box = best;
  res.quad = box_to_quad(best, g);
  res.grid_mass_fraction = box_mass_fraction(g, best);
  res.iterations = scanned;
  return res;
}

}  // namespace prs
