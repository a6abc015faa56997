// Samplers and PDFs for the three target distributions, plus JSON specs.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prs/geometry.hpp"
#include "prs/rng.hpp"

#include "json.hpp"

namespace prs {

// Two isotropic Gaussian clusters, equal weight.
struct BinomialSpec {
  Point2 c1{-4.0, 0.0};
  Point2 c2{4.0, 0.0};
  double sigma = 2.0;
};

// One-shot Dubins step with truncated-Gaussian speed and heading. Speed in
// km/h, heading in degrees, dt in hours.
struct FanshapeSpec {
  Point2 start{0.0, 0.0};
  double speed_mean = 190.0;
  double speed_std = 5.0;
  double speed_lo = 165.0;
  double speed_hi = 220.0;
  double heading_mean_deg = 10.0;
  double heading_std_deg = 30.0;
  double heading_lo_deg = -50.0;
  double heading_hi_deg = 70.0;
  double dt = 0.05;
  int steps = 1;
};

struct MixtureComponent {
  double weight = 1.0;
  Point2 mean{0.0, 0.0};
  double cov_xx = 1.0, cov_xy = 0.0, cov_yy = 1.0;  // SPD 2x2
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
};

struct DistributionSpec {
  std::variant<BinomialSpec, FanshapeSpec, MixtureSpec> dist;
  uint64_t seed = 0;
  std::string id;
};

// Validates invariants (sigma > 0, weights sum to 1 within 1e-9, SPD
// covariances, truncation ranges containing their means). Throws ConfigError.
void validate(const DistributionSpec& spec);

// n i.i.d. draws, deterministic for a fixed rng_seed. Fanshape draws one
// (v, theta) pair per sample and integrates `steps` position updates with
// them held constant.
SampleSet sample(const DistributionSpec& spec, size_t n, uint64_t rng_seed);

// Density at p, or nullopt when no closed form exists (fanshape).
std::optional<double> pdf(const DistributionSpec& spec, const Point2& p);

// Rejection-sampled truncated Gaussian. std == 0 returns mean (which must
// lie in [lo, hi]). Throws RejectionStall after 10,000 rejected draws.
double truncated_gaussian(double mean, double std, double lo, double hi,
                          Rng& rng);

// JSON spec document, e.g.
//   {"type":"binomial","c1":[-4,0],"c2":[4,0],"sigma":2.0,"seed":1,"id":"b"}
// Unknown keys are rejected.
DistributionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const DistributionSpec& spec);
DistributionSpec load_spec(const std::string& path);

}  // namespace prs
