#include "prs/distributions.hpp"

#include <cmath>
#include <fstream>

#include "prs/errors.hpp"

namespace prs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

double gauss2(const Point2& p, const Point2& mu, double sigma2) {
  double dx = p.x - mu.x, dy = p.y - mu.y;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma2)) /
         (2.0 * kPi * sigma2);
}

double mixture_component_pdf(const Point2& p, const MixtureComponent& c) {
  double det = c.cov_xx * c.cov_yy - c.cov_xy * c.cov_xy;
  double dx = p.x - c.mean.x, dy = p.y - c.mean.y;
  // Inverse of [[xx, xy], [xy, yy]] applied to (dx, dy).
  double qx = (c.cov_yy * dx - c.cov_xy * dy) / det;
  double qy = (-c.cov_xy * dx + c.cov_xx * dy) / det;
  double quad = dx * qx + dy * qy;
  return std::exp(-0.5 * quad) / (2.0 * kPi * std::sqrt(det));
}

Point2 sample_binomial(const BinomialSpec& b, Rng& rng) {
  const Point2& c = rng.uniform() < 0.5 ? b.c1 : b.c2;
  return {c.x + rng.normal(0.0, b.sigma), c.y + rng.normal(0.0, b.sigma)};
}

Point2 sample_fanshape(const FanshapeSpec& f, Rng& rng) {
  double v = truncated_gaussian(f.speed_mean, f.speed_std, f.speed_lo,
                                f.speed_hi, rng);
  double th = truncated_gaussian(f.heading_mean_deg, f.heading_std_deg,
                                 f.heading_lo_deg, f.heading_hi_deg, rng) *
              kDegToRad;
  Point2 p = f.start;
  for (int k = 0; k < f.steps; ++k) {
    p.x += std::cos(th) * v * f.dt;
    p.y += std::sin(th) * v * f.dt;
  }
  return p;
}

Point2 sample_mixture(const MixtureSpec& m, Rng& rng) {
  double u = rng.uniform();
  size_t pick = m.components.size() - 1;
  double acc = 0.0;
  for (size_t k = 0; k < m.components.size(); ++k) {
    acc += m.components[k].weight;
    if (u < acc) {
      pick = k;
      break;
    }
  }
  const MixtureComponent& c = m.components[pick];
  // Cholesky of [[xx, xy], [xy, yy]].
  double l11 = std::sqrt(c.cov_xx);
  double l21 = c.cov_xy / l11;
  double l22 = std::sqrt(c.cov_yy - l21 * l21);
  double z1 = rng.normal(), z2 = rng.normal();
  return {c.mean.x + l11 * z1, c.mean.y + l21 * z1 + l22 * z2};
}

void expect_keys(const nlohmann::json& j,
                 const std::vector<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown key in spec: " + it.key());
  }
}

Point2 point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void validate(const DistributionSpec& spec) {
  if (std::holds_alternative<BinomialSpec>(spec.dist)) {
    const auto& b = std::get<BinomialSpec>(spec.dist);
    if (!(b.sigma > 0.0)) throw ConfigError("binomial: sigma must be > 0");
    if (!finite(b.c1) || !finite(b.c2)) {
      throw ConfigError("binomial: non-finite center");
    }
  } else if (std::holds_alternative<FanshapeSpec>(spec.dist)) {
    const auto& f = std::get<FanshapeSpec>(spec.dist);
    if (f.speed_lo >= f.speed_hi || f.heading_lo_deg >= f.heading_hi_deg) {
      throw ConfigError("fanshape: empty truncation range");
    }
    if (f.speed_mean < f.speed_lo || f.speed_mean > f.speed_hi ||
        f.heading_mean_deg < f.heading_lo_deg ||
        f.heading_mean_deg > f.heading_hi_deg) {
      throw ConfigError("fanshape: mean outside truncation range");
    }
    if (!(f.dt > 0.0) || f.steps < 1 || !std::isfinite(f.dt * f.steps)) {
      throw ConfigError("fanshape: bad dt/steps");
    }
  } else {
    const auto& m = std::get<MixtureSpec>(spec.dist);
    if (m.components.empty()) throw ConfigError("mixture: no components");
    double wsum = 0.0;
    for (const auto& c : m.components) {
      if (c.weight < 0.0 || c.weight > 1.0) {
        throw ConfigError("mixture: weight outside [0, 1]");
      }
      wsum += c.weight;
      double det = c.cov_xx * c.cov_yy - c.cov_xy * c.cov_xy;
      if (!(c.cov_xx > 0.0) || !(det > 0.0)) {
        throw ConfigError("mixture: covariance not SPD");
      }
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
      throw ConfigError("mixture: weights must sum to 1");
    }
  }
}

double truncated_gaussian(double mean, double std, double lo, double hi,
                          Rng& rng) {
  if (!(lo < hi)) throw ConfigError("truncated_gaussian: lo >= hi");
  if (std == 0.0) {
    if (mean < lo || mean > hi) {
      throw ConfigError("truncated_gaussian: mean outside range");
    }
    return mean;
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double x = rng.normal(mean, std);
    if (x >= lo && x <= hi) return x;
  }
  throw RejectionStall("truncated_gaussian: 10,000 rejections");
}

SampleSet sample(const DistributionSpec& spec, size_t n, uint64_t rng_seed) {
  validate(spec);
  Rng rng(rng_seed);
  SampleSet out;
  out.provenance = spec.id;
  out.points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (std::holds_alternative<BinomialSpec>(spec.dist)) {
      out.points.push_back(sample_binomial(std::get<BinomialSpec>(spec.dist), rng));
    } else if (std::holds_alternative<FanshapeSpec>(spec.dist)) {
      out.points.push_back(sample_fanshape(std::get<FanshapeSpec>(spec.dist), rng));
    } else {
      out.points.push_back(sample_mixture(std::get<MixtureSpec>(spec.dist), rng));
    }
  }
  return out;
}

std::optional<double> pdf(const DistributionSpec& spec, const Point2& p) {
  if (std::holds_alternative<BinomialSpec>(spec.dist)) {
    const auto& b = std::get<BinomialSpec>(spec.dist);
    double s2 = b.sigma * b.sigma;
    return 0.5 * gauss2(p, b.c1, s2) + 0.5 * gauss2(p, b.c2, s2);
  }
  if (std::holds_alternative<MixtureSpec>(spec.dist)) {
    const auto& m = std::get<MixtureSpec>(spec.dist);
    double d = 0.0;
    for (const auto& c : m.components) d += c.weight * mixture_component_pdf(p, c);
    return d;
  }
  return std::nullopt;  // fanshape: no closed-form position density
}

DistributionSpec spec_from_json(const nlohmann::json& j) {
  if (!j.contains("type")) throw ConfigError("spec missing \"type\"");
  std::string type = j.at("type").get<std::string>();
  DistributionSpec spec;
  if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
  if (j.contains("id")) spec.id = j.at("id").get<std::string>();

  if (type == "binomial") {
    expect_keys(j, {"type", "seed", "id", "c1", "c2", "sigma"});
    BinomialSpec b;
    if (j.contains("c1")) b.c1 = point_from(j.at("c1"));
    if (j.contains("c2")) b.c2 = point_from(j.at("c2"));
    if (j.contains("sigma")) b.sigma = j.at("sigma").get<double>();
    spec.dist = b;
  } else if (type == "fanshape") {
    expect_keys(j, {"type", "seed", "id", "start", "speed", "heading_deg",
                    "dt", "steps"});
    FanshapeSpec f;
    if (j.contains("start")) f.start = point_from(j.at("start"));
    if (j.contains("speed")) {
      const auto& s = j.at("speed");
      expect_keys(s, {"mean", "std", "range"});
      if (s.contains("mean")) f.speed_mean = s.at("mean").get<double>();
      if (s.contains("std")) f.speed_std = s.at("std").get<double>();
      if (s.contains("range")) {
        f.speed_lo = s.at("range")[0].get<double>();
        f.speed_hi = s.at("range")[1].get<double>();
      }
    }
    if (j.contains("heading_deg")) {
      const auto& h = j.at("heading_deg");
      expect_keys(h, {"mean", "std", "range"});
      if (h.contains("mean")) f.heading_mean_deg = h.at("mean").get<double>();
      if (h.contains("std")) f.heading_std_deg = h.at("std").get<double>();
      if (h.contains("range")) {
        f.heading_lo_deg = h.at("range")[0].get<double>();
        f.heading_hi_deg = h.at("range")[1].get<double>();
      }
    }
    if (j.contains("dt")) f.dt = j.at("dt").get<double>();
    if (j.contains("steps")) f.steps = j.at("steps").get<int>();
    spec.dist = f;
  } else if (type == "mixture") {
    expect_keys(j, {"type", "seed", "id", "components"});
    MixtureSpec m;
    for (const auto& cj : j.at("components")) {
      expect_keys(cj, {"weight", "mean", "cov"});
      MixtureComponent c;
      c.weight = cj.at("weight").get<double>();
      c.mean = point_from(cj.at("mean"));
      const auto& cov = cj.at("cov");
      c.cov_xx = cov[0][0].get<double>();
      c.cov_xy = cov[0][1].get<double>();
      c.cov_yy = cov[1][1].get<double>();
      m.components.push_back(c);
    }
    spec.dist = m;
  } else {
    throw ConfigError("unknown distribution type: " + type);
  }
  validate(spec);
  return spec;
}

nlohmann::json spec_to_json(const DistributionSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["id"] = spec.id;
  if (std::holds_alternative<BinomialSpec>(spec.dist)) {
    const auto& b = std::get<BinomialSpec>(spec.dist);
    j["type"] = "binomial";
    j["c1"] = {b.c1.x, b.c1.y};
    j["c2"] = {b.c2.x, b.c2.y};
    j["sigma"] = b.sigma;
  } else if (std::holds_alternative<FanshapeSpec>(spec.dist)) {
    const auto& f = std::get<FanshapeSpec>(spec.dist);
    j["type"] = "fanshape";
    j["start"] = {f.start.x, f.start.y};
    j["speed"] = {{"mean", f.speed_mean},
                  {"std", f.speed_std},
                  {"range", {f.speed_lo, f.speed_hi}}};
    j["heading_deg"] = {{"mean", f.heading_mean_deg},
                        {"std", f.heading_std_deg},
                        {"range", {f.heading_lo_deg, f.heading_hi_deg}}};
    j["dt"] = f.dt;
    j["steps"] = f.steps;
  } else {
    const auto& m = std::get<MixtureSpec>(spec.dist);
    j["type"] = "mixture";
    j["components"] = nlohmann::json::array();
    for (const auto& c : m.components) {
      j["components"].push_back(
          {{"weight", c.weight},
           {"mean", {c.mean.x, c.mean.y}},
           {"cov", {{c.cov_xx, c.cov_xy}, {c.cov_xy, c.cov_yy}}}});
    }
  }
  return j;
}

DistributionSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace prs
