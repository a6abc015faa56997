#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "prs/density.hpp"
#include "prs/distributions.hpp"
#include "prs/errors.hpp"
#include "prs/rng.hpp"

using namespace prs;

namespace {

SampleSet random_set(size_t n, uint64_t seed, double spread = 5.0) {
  Rng rng(seed);
  SampleSet s;
  for (size_t i = 0; i < n; ++i) {
    s.points.push_back({spread * rng.normal(), spread * rng.normal()});
  }
  return s;
}

double max_rel_diff(const GridDensity& a, const GridDensity& b) {
  double peak = *std::max_element(a.weights.begin(), a.weights.end());
  double worst = 0.0;
  for (size_t i = 0; i < a.weights.size(); ++i) {
    worst = std::max(worst, std::abs(a.weights[i] - b.weights[i]) / peak);
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("density");

TEST_CASE("silverman bandwidth formula and scale equivariance") {
  SampleSet s = random_set(100, 5, 1.0);
  double h = bandwidth_silverman(s);
  CHECK(h > 0.0);
  // Unit-ish variance, |s| = 100: h near 100^(-1/6).
  CHECK(h == doctest::Approx(std::pow(100.0, -1.0 / 6.0)).epsilon(0.25));

  SampleSet scaled = s;
  for (auto& p : scaled.points) { p.x *= 10.0; p.y *= 10.0; }
  CHECK(bandwidth_silverman(scaled) == doctest::Approx(10.0 * h).epsilon(1e-12));

  SampleSet one;
  one.points = {{0, 0}};
  CHECK_THROWS_AS(bandwidth_silverman(one), DegenerateFrame);
}

TEST_CASE("direct KDE peaks at the sample location") {
  SampleSet s;
  s.points = {{0.0, 0.0}, {1.0, 1.0}};
  KdeConfig cfg;
  cfg.grid_n = 32;
  cfg.fixed_bandwidth = 0.15;
  GridDensity g = kde_grid_direct(s, cfg);
  size_t argmax =
      size_t(std::max_element(g.weights.begin(), g.weights.end()) -
             g.weights.begin());
  int i = int(argmax) / g.n, j = int(argmax) % g.n;
  Point2 c = g.cell_center(i, j);
  // Peak lands on one of the two samples.
  double d0 = std::hypot(c.x, c.y);
  double d1 = std::hypot(c.x - 1.0, c.y - 1.0);
  CHECK(std::min(d0, d1) < 2.0 * std::max(g.cell_w, g.cell_h));
}

TEST_CASE("duplicating every sample exactly doubles the weights") {
  SampleSet s = random_set(50, 21);
  SampleSet doubled = s;
  doubled.points.insert(doubled.points.end(), s.points.begin(), s.points.end());
  KdeConfig cfg;
  cfg.grid_n = 32;
  cfg.fixed_bandwidth = 1.0;  // keep the kernel identical across both runs
  GridDensity a = kde_grid_direct(s, cfg);
  GridDensity b = kde_grid_direct(doubled, cfg);
  for (size_t i = 0; i < a.weights.size(); ++i) {
    CHECK(b.weights[i] ==
          doctest::Approx(2.0 * a.weights[i]).epsilon(1e-12));
  }
}

TEST_CASE("200 standard normal samples keep most mass on the padded grid") {
  DistributionSpec spec;
  spec.dist = MixtureSpec{{{1.0, {0, 0}, 1.0, 0.0, 1.0}}};
  SampleSet s = sample(spec, 200, 33);
  KdeConfig cfg;
  cfg.grid_n = 32;
  GridDensity g = kde_grid_direct(s, cfg);
  double mass = g.total_mass() * g.cell_w * g.cell_h / double(s.size());
  CHECK(mass >= 0.95);
  CHECK(mass <= 1.0 + 1e-9);
}

TEST_CASE("fft path matches the direct oracle") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    SampleSet s = random_set(200 + 137 * seed, seed + 100);
    KdeConfig cfg;
    cfg.grid_n = 32;
    GridDensity direct = kde_grid_direct(s, cfg);
    GridDensity fft = kde_grid_fft(s, cfg);
    CHECK(fft.n == direct.n);
    CHECK(fft.origin.x == direct.origin.x);
    CHECK(max_rel_diff(direct, fft) < 1e-9);
  }
}

TEST_CASE("fft path requires a power-of-two grid") {
  SampleSet s = random_set(50, 3);
  KdeConfig cfg;
  cfg.grid_n = 48;
  CHECK_THROWS_AS(kde_grid_fft(s, cfg), ConfigError);
  cfg.grid_n = 4;
  CHECK_THROWS_AS(kde_grid_fft(s, cfg), ConfigError);
  CHECK_THROWS_AS(kde_grid_direct(s, cfg), ConfigError);
}

TEST_CASE("weights are translation equivariant bit for bit") {
  // Dyadic coordinates and a dyadic shift keep every FP op exact.
  SampleSet s;
  Rng rng(7);
  for (int i = 0; i < 64; ++i) {
    s.points.push_back({std::floor(rng.uniform() * 64.0) / 64.0,
                        std::floor(rng.uniform() * 64.0) / 64.0});
  }
  KdeConfig cfg;
  cfg.grid_n = 16;
  cfg.fixed_bandwidth = 0.25;
  GridDensity base = kde_grid_fft(s, cfg);

  double delta = 16.0;
  SampleSet shifted = s;
  for (auto& p : shifted.points) { p.x += delta; p.y += delta; }
  GridDensity moved = kde_grid_fft(shifted, cfg);
  CHECK(moved.origin.x == base.origin.x + delta);
  CHECK(moved.origin.y == base.origin.y + delta);
  for (size_t i = 0; i < base.weights.size(); ++i) {
    CHECK(moved.weights[i] == base.weights[i]);
  }
}

TEST_CASE("adding a sample inside the box never decreases any weight") {
  SampleSet s = random_set(80, 55);
  KdeConfig cfg;
  cfg.grid_n = 16;
  cfg.fixed_bandwidth = 2.0;
  GridDensity before = kde_grid_direct(s, cfg);
  SampleSet more = s;
  more.points.push_back({0.0, 0.0});  // mean region, inside the bbox
  GridDensity after = kde_grid_direct(more, cfg);
  REQUIRE(after.origin.x == before.origin.x);
  for (size_t i = 0; i < before.weights.size(); ++i) {
    CHECK(after.weights[i] >= before.weights[i]);
  }
}

TEST_CASE("csv export carries the grid geometry") {
  SampleSet s = random_set(30, 8);
  KdeConfig cfg;
  cfg.grid_n = 8;
  cfg.fixed_bandwidth = 1.0;
  GridDensity g = kde_grid_direct(s, cfg);
  std::string path = std::string(PRS_TEST_TMP) + "_grid.csv";
  write_csv(g, path);
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.find("n=8") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);
}

TEST_SUITE_END();
