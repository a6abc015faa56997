// Box extraction from a grid density: greedy heuristic, bounding-box
// baseline, and an exhaustive minimum-area oracle.
#pragma once

#include <cstdint>

#include "prs/density.hpp"
#include "prs/geometry.hpp"

namespace prs {

struct GridBox {
  int r_min = 0, r_max = 0, c_min = 0, c_max = 0;  // inclusive cell indices

  long cells() const {
    return long(r_max - r_min + 1) * long(c_max - c_min + 1);
  }
};

struct BoxResult {
  GridBox box;
  ConvexQuad quad;               // world coords of the box's outer cell edges
  double grid_mass_fraction = 0.0;
  long iterations = 0;
};

// Greedy expansion: seed the box at the argmax cell, then repeatedly pop the
// current maximum cell, grow the box bounds to include it, until the box
// encloses at least alpha of the total grid mass. Argmax ties break by
// smallest (row, col).
BoxResult ilp_heuristic(const GridDensity& g, double alpha);

// Highest-density region (smallest count of top-weight cells reaching alpha
// of the mass), then its axis-aligned bounding box.
BoxResult bounding_box(const GridDensity& g, double alpha);

// Minimum-cell-count axis-aligned box with mass fraction >= alpha; ties
// break by smaller (r_min, c_min). O(n^4) with prefix-sum mass queries;
// requires n <= 64.
BoxResult optimal_box(const GridDensity& g, double alpha);

// World-coordinate quad at the outer edges of the box's boundary cells.
ConvexQuad box_to_quad(const GridBox& box, const GridDensity& g);

// Mass enclosed by `box` divided by total mass, summed directly.
double box_mass_fraction(const GridDensity& g, const GridBox& box);

}  // namespace prs
