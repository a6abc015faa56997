#include <cmath>

#include "doctest.h"
#include "prs/distributions.hpp"
#include "prs/errors.hpp"

using namespace prs;

namespace {

constexpr double kPi = 3.14159265358979323846;

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

DistributionSpec binomial_spec() {
  DistributionSpec s;
  s.dist = BinomialSpec{};
  s.id = "binomial";
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("distributions");

TEST_CASE("binomial degenerate limit collapses to the center") {
  DistributionSpec s;
  s.dist = BinomialSpec{{1, 2}, {1, 2}, 1e-300};
  SampleSet out = sample(s, 500, 9);
  for (const auto& p : out.points) {
    CHECK(p.x == 1.0);
    CHECK(p.y == 2.0);
  }
}

TEST_CASE("fanshape with zero noise is the deterministic Dubins step") {
  DistributionSpec s;
  FanshapeSpec f;
  f.speed_std = 0.0;
  f.heading_std_deg = 0.0;
  f.dt = 1.0;
  f.steps = 1;
  s.dist = f;
  SampleSet out = sample(s, 5, 3);
  double rad = 10.0 * kPi / 180.0;
  for (const auto& p : out.points) {
    CHECK(p.x == doctest::Approx(190.0 * std::cos(rad)).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(190.0 * std::sin(rad)).epsilon(1e-12));
  }
  CHECK(out.points[0].x == doctest::Approx(187.11).epsilon(1e-4));
  CHECK(out.points[0].y == doctest::Approx(32.99).epsilon(1e-3));
}

TEST_CASE("single-component mixture matches its moments") {
  DistributionSpec s;
  s.dist = MixtureSpec{{{1.0, {0, 0}, 1.0, 0.0, 1.0}}};
  SampleSet out = sample(s, 1000000, 11);
  double mx = 0, my = 0;
  for (const auto& p : out.points) { mx += p.x; my += p.y; }
  mx /= 1e6; my /= 1e6;
  CHECK(std::abs(mx) < 0.01);
  CHECK(std::abs(my) < 0.01);
  double cxx = 0, cxy = 0, cyy = 0;
  for (const auto& p : out.points) {
    cxx += (p.x - mx) * (p.x - mx);
    cxy += (p.x - mx) * (p.y - my);
    cyy += (p.y - my) * (p.y - my);
  }
  CHECK(std::abs(cxx / 1e6 - 1.0) < 0.01);
  CHECK(std::abs(cxy / 1e6) < 0.01);
  CHECK(std::abs(cyy / 1e6 - 1.0) < 0.01);
}

TEST_CASE("pdf closed forms") {
  DistributionSpec s;
  s.dist = BinomialSpec{{-1, 0}, {1, 0}, 1.0};
  auto d = pdf(s, {0, 0});
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(std::exp(-0.5) / (2.0 * kPi)).epsilon(1e-12));
  CHECK(*d == doctest::Approx(0.09653).epsilon(1e-4));

  s.dist = MixtureSpec{{{1.0, {0, 0}, 1.0, 0.0, 1.0}}};
  d = pdf(s, {0, 0});
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-12));

  s.dist = FanshapeSpec{};
  CHECK_FALSE(pdf(s, {0, 0}).has_value());
}

TEST_CASE("binomial pdf integrates to one over a wide window") {
  DistributionSpec s = binomial_spec();
  const auto& b = std::get<BinomialSpec>(s.dist);
  double lo_x = b.c1.x - 6 * b.sigma, hi_x = b.c2.x + 6 * b.sigma;
  double lo_y = -6 * b.sigma, hi_y = 6 * b.sigma;
  int n = 400;
  double dx = (hi_x - lo_x) / n, dy = (hi_y - lo_y) / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Point2 p{lo_x + (j + 0.5) * dx, lo_y + (i + 0.5) * dy};
      mass += *pdf(s, p) * dx * dy;
    }
  }
  CHECK(mass > 0.99);
  CHECK(mass < 1.01);
}

TEST_CASE("truncated gaussian stays in range and matches the analytic mean") {
  Rng rng(17);
  double lo = -50, hi = 70, mean = 10, std = 30;
  double a = (lo - mean) / std, b = (hi - mean) / std;
  double analytic = mean + std * (phi(a) - phi(b)) / (Phi(b) - Phi(a));
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = truncated_gaussian(mean, std, lo, hi, rng);
    CHECK(x >= lo);
    CHECK(x <= hi);
    acc += x;
  }
  CHECK(std::abs(acc / n - analytic) < 1.0);

  Rng rng2(18);
  for (int i = 0; i < 1000; ++i) {
    double x = truncated_gaussian(190, 5, 165, 220, rng2);
    CHECK(x >= 165);
    CHECK(x <= 220);
  }
  CHECK(truncated_gaussian(190, 0.0, 165, 220, rng2) == 190.0);
}

TEST_CASE("seeded determinism is bit exact") {
  DistributionSpec s = binomial_spec();
  SampleSet a = sample(s, 500, 1234);
  SampleSet b = sample(s, 500, 1234);
  for (size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].x == b.points[i].x);
    CHECK(a.points[i].y == b.points[i].y);
  }
  SampleSet c = sample(s, 500, 1235);
  bool any_diff = false;
  for (size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].x != c.points[i].x) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("fanshape samples stay in the reachable annular sector") {
  DistributionSpec s;
  FanshapeSpec f;
  f.steps = 2;
  s.dist = f;
  SampleSet out = sample(s, 5000, 77);
  double reach = f.dt * f.steps;
  for (const auto& p : out.points) {
    double r = std::hypot(p.x, p.y);
    CHECK(r >= 165.0 * reach - 1e-9);
    CHECK(r <= 220.0 * reach + 1e-9);
    double th = std::atan2(p.y, p.x) * 180.0 / kPi;
    CHECK(th >= -50.0 - 1e-9);
    CHECK(th <= 70.0 + 1e-9);
  }
}

TEST_CASE("spec JSON round-trips and rejects unknown keys") {
  nlohmann::json j = {{"type", "binomial"}, {"c1", {-4, 0}}, {"c2", {4, 0}},
                      {"sigma", 2.0}, {"seed", 1}, {"id", "b"}};
  DistributionSpec s = spec_from_json(j);
  CHECK(spec_to_json(s) == spec_to_json(spec_from_json(spec_to_json(s))));

  j["bogus"] = 1;
  CHECK_THROWS_AS(spec_from_json(j), ConfigError);
  CHECK_THROWS_AS(spec_from_json({{"type", "nope"}}), ConfigError);
}

TEST_CASE("validate rejects broken specs") {
  DistributionSpec s;
  s.dist = BinomialSpec{{0, 0}, {1, 1}, -1.0};
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.dist = MixtureSpec{{{0.5, {0, 0}, 1, 0, 1}}};
  CHECK_THROWS_AS(validate(s), ConfigError);  // weights sum to 0.5
  s.dist = MixtureSpec{{{1.0, {0, 0}, 1.0, 2.0, 1.0}}};
  CHECK_THROWS_AS(validate(s), ConfigError);  // not SPD
  FanshapeSpec f;
  f.heading_mean_deg = 100.0;
  s.dist = f;
  CHECK_THROWS_AS(validate(s), ConfigError);  // mean outside range
}

TEST_SUITE_END();
