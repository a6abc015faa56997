#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "prs/boxer.hpp"
#include "prs/errors.hpp"
#include "prs/rng.hpp"

using namespace prs;

namespace {

GridDensity grid_from(const std::vector<std::vector<double>>& rows) {
  GridDensity g;
  g.n = int(rows.size());
  g.origin = {0.0, 0.0};
  g.cell_w = 1.0;
  g.cell_h = 1.0;
  for (const auto& r : rows) {
    REQUIRE(r.size() == rows.size());
    g.weights.insert(g.weights.end(), r.begin(), r.end());
  }
  return g;
}

GridDensity random_grid(int n, uint64_t seed) {
  GridDensity g;
  g.n = n;
  g.origin = {0.0, 0.0};
  g.cell_w = 1.0;
  g.cell_h = 1.0;
  Rng rng(seed);
  for (int i = 0; i < n * n; ++i) g.weights.push_back(rng.uniform());
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("boxer");

TEST_CASE("hand trace: single hot cell") {
  GridDensity g = grid_from({{0, 0, 0}, {0, 1, 0}, {0, 0, 0}});
  BoxResult r = ilp_heuristic(g, 0.9);
  CHECK(r.box.r_min == 1);
  CHECK(r.box.r_max == 1);
  CHECK(r.box.c_min == 1);
  CHECK(r.box.c_max == 1);
  CHECK(r.grid_mass_fraction == doctest::Approx(1.0));
  CHECK(r.iterations == 1);
}

TEST_CASE("hand trace: greedy expansion to the full 2x2 grid") {
  GridDensity g = grid_from({{4, 1}, {1, 2}});
  BoxResult r = ilp_heuristic(g, 0.6);
  // Iteration 1 takes (0,0): mass 4/8 = 0.5 < 0.6. Iteration 2 takes (1,1),
  // the box expands to the full grid.
  CHECK(r.iterations == 2);
  CHECK(r.box.r_min == 0);
  CHECK(r.box.r_max == 1);
  CHECK(r.box.c_min == 0);
  CHECK(r.box.c_max == 1);
  CHECK(r.grid_mass_fraction == doctest::Approx(1.0));
}

TEST_CASE("uniform weights at alpha near one cover the full grid") {
  GridDensity g = grid_from({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  BoxResult r = ilp_heuristic(g, 0.999);
  CHECK(r.box.cells() == 9);
}

TEST_CASE("mass post-condition holds exactly on random grids") {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    int n = 4 + int(rng.uniform() * 13.0);
    GridDensity g = random_grid(n, 1000 + uint64_t(t));
    double alpha = 0.05 + 0.9 * rng.uniform();
    BoxResult r = ilp_heuristic(g, alpha);
    CHECK(box_mass_fraction(g, r.box) >= alpha);
    CHECK(r.iterations <= long(n) * n);
  }
}

TEST_CASE("invalid alpha is rejected everywhere") {
  GridDensity g = grid_from({{4, 1}, {1, 2}});
  CHECK_THROWS_AS(ilp_heuristic(g, 0.0), InvalidAlpha);
  CHECK_THROWS_AS(ilp_heuristic(g, 1.0), InvalidAlpha);
  CHECK_THROWS_AS(bounding_box(g, -0.5), InvalidAlpha);
  CHECK_THROWS_AS(optimal_box(g, 1.5), InvalidAlpha);
}

TEST_CASE("bounding box: single hot cell and the 2x2 hand case") {
  GridDensity g1 = grid_from({{0, 0, 0}, {0, 5, 0}, {0, 0, 0}});
  for (double a : {0.1, 0.5, 0.95}) {
    BoxResult r = bounding_box(g1, a);
    CHECK(r.box.cells() == 1);
    CHECK(r.box.r_min == 1);
    CHECK(r.box.c_min == 1);
  }
  GridDensity g2 = grid_from({{4, 1}, {1, 2}});
  BoxResult r = bounding_box(g2, 0.6);
  // HDR cells {4, 2} give mass 6/8 = 0.75; their bbox is the full grid.
  CHECK(r.box.cells() == 4);
  CHECK(r.grid_mass_fraction == doctest::Approx(1.0));
}

TEST_CASE("bounding box mass always reaches alpha") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    GridDensity g = random_grid(12, 300 + uint64_t(t));
    double alpha = 0.05 + 0.9 * rng.uniform();
    BoxResult r = bounding_box(g, alpha);
    CHECK(r.grid_mass_fraction >= alpha);
  }
}

TEST_CASE("optimal box beats the heuristic on the 2x2 hand case") {
  GridDensity g = grid_from({{4, 1}, {1, 2}});
  BoxResult opt = optimal_box(g, 0.6);
  CHECK(opt.box.cells() == 2);
  CHECK(opt.box.r_min == 0);
  CHECK(opt.box.r_max == 0);
  CHECK(opt.box.c_min == 0);
  CHECK(opt.box.c_max == 1);
  CHECK(opt.grid_mass_fraction == doctest::Approx(5.0 / 8.0));
  BoxResult ilp = ilp_heuristic(g, 0.6);
  CHECK(opt.box.cells() < ilp.box.cells());
}

TEST_CASE("optimal box at tiny alpha is the single max-weight cell") {
  GridDensity g = grid_from({{4, 1}, {1, 2}});
  BoxResult r = optimal_box(g, 0.01);
  CHECK(r.box.cells() == 1);
  CHECK(r.box.r_min == 0);
  CHECK(r.box.c_min == 0);
}

TEST_CASE("optimal box tie-break on a uniform 4x4 grid") {
  GridDensity g = random_grid(4, 0);
  std::fill(g.weights.begin(), g.weights.end(), 1.0);
  BoxResult r = optimal_box(g, 0.5);
  CHECK(r.box.cells() == 8);
  CHECK(r.box.r_min == 0);
  CHECK(r.box.c_min == 0);
  CHECK(r.box.r_max == 1);
  CHECK(r.box.c_max == 3);
}

TEST_CASE("optimal box refuses large grids") {
  GridDensity g = random_grid(65, 1);
  CHECK_THROWS_AS(optimal_box(g, 0.5), GridTooLarge);
}

TEST_CASE("oracle dominance on random instances") {
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    GridDensity g = random_grid(10, 500 + uint64_t(t));
    double alpha = 0.1 + 0.8 * rng.uniform();
    BoxResult opt = optimal_box(g, alpha);
    BoxResult ilp = ilp_heuristic(g, alpha);
    CHECK(opt.grid_mass_fraction >= alpha);
    CHECK(ilp.grid_mass_fraction >= alpha);
    CHECK(area(opt.quad) <= area(ilp.quad) + 1e-12);
    BoxResult bb = bounding_box(g, alpha);
    CHECK(area(bb.quad) >= area(opt.quad) - 1e-12);
  }
}

TEST_CASE("box_to_quad maps outer cell edges to world space") {
  GridDensity g = grid_from({{1, 1}, {1, 1}});
  ConvexQuad q = box_to_quad({0, 1, 0, 1}, g);
  CHECK(area(q) == doctest::Approx(4.0));
  CHECK(q.vertices[0].x == 0.0);
  CHECK(q.vertices[0].y == 0.0);
  CHECK(q.vertices[2].x == 2.0);
  CHECK(q.vertices[2].y == 2.0);

  ConvexQuad cell = box_to_quad({0, 0, 0, 0}, g);
  CHECK(area(cell) == doctest::Approx(1.0));

  // Every enclosed cell center lies inside the quad.
  GridDensity big = random_grid(8, 2);
  GridBox box{2, 5, 1, 6};
  ConvexQuad quad = box_to_quad(box, big);
  for (int i = box.r_min; i <= box.r_max; ++i) {
    for (int j = box.c_min; j <= box.c_max; ++j) {
      CHECK(contains(quad, big.cell_center(i, j)));
    }
  }
}

TEST_SUITE_END();
