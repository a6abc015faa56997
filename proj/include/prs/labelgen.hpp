// Expert label generation with Monte Carlo calibration, and corpus building.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prs/boxer.hpp"
#include "prs/density.hpp"
#include "prs/distributions.hpp"
#include "prs/geometry.hpp"

namespace prs {

struct ExpertLabel {
  std::string dist_id;
  double alpha = 0.0;
  ConvexQuad quad;          // world coordinates
  double coverage_est = 0.0;
  long n_validation = 0;
  uint64_t seed = 0;
};

struct LabelGenConfig {
  int expert_samples = 10000;   // fresh draw per label for the KDE
  KdeConfig kde;                // grid the expert works on
  long n_mc = 100000;           // Monte Carlo points per coverage estimate
  int max_bisect = 30;
  int max_retries = 10;         // fresh-seed retries after CalibrationFailed
  // Calibration lands coverage in [alpha + band_lo, alpha + band_hi], a
  // sub-band of the required [alpha, alpha + 0.01] that leaves room for
  // Monte Carlo error on revalidation.
  double band_lo = 0.0035;
  double band_hi = 0.0085;
};

// Fraction of n_mc fresh draws from `spec` that land inside `quad`.
double estimate_coverage(const DistributionSpec& spec, const ConvexQuad& quad,
                         long n_mc, uint64_t seed);

// Draws an expert sample set, grids it, and bisects the internal mass target
// of the greedy box until independent Monte Carlo coverage lands in the
// calibration band. Throws CalibrationFailed when bisection cannot land a
// box in the band for any of max_retries seeds.
ExpertLabel generate_expert_label(const DistributionSpec& spec, double alpha,
                                  const LabelGenConfig& cfg, uint64_t seed);

// --- corpus ---

struct CorpusEntry {
  DistributionSpec spec;
  std::vector<double> alphas;
  int labels_per_alpha = 100;
  long n_examples = 320000;
  int n_vis = 100;  // visible points per training example
  std::string labels_file;
  std::string examples_file;
  uint64_t seed = 0;
};

struct CorpusManifest {
  std::string dir;  // directory the file names are relative to
  std::vector<CorpusEntry> entries;
};

CorpusManifest manifest_from_json(const nlohmann::json& j,
                                  const std::string& dir);
CorpusManifest load_manifest(const std::string& path);

// Builds every entry's label pool and example file. Files already recorded
// in the status sidecar (manifest path + ".status.json") are verified by
// checksum and skipped; a stale checksum raises Error naming the file.
// labels_only restricts the build to the label pools.
struct BuildProgress {
  long labels_done = 0;
  long examples_done = 0;
  bool labels_skipped = false;
  bool examples_skipped = false;
};
std::vector<BuildProgress> build_corpus(const CorpusManifest& manifest,
                                        const std::string& manifest_path,
                                        const LabelGenConfig& cfg,
                                        bool verbose = false,
                                        bool labels_only = false);

}  // namespace prs
