#include "prs/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "prs/corpus_io.hpp"
#include "prs/errors.hpp"

namespace prs {

namespace {

namespace fs = std::filesystem;

double coverage_of(const std::vector<Point2>& pts, const ConvexQuad& quad) {
  long inside = 0;
  for (const auto& p : pts) {
    if (contains(quad, p)) ++inside;
  }
  return double(inside) / double(pts.size());
}

nlohmann::json load_status(const std::string& path) {
  std::ifstream in(path);
  if (!in) return nlohmann::json::object();
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

double estimate_coverage(const DistributionSpec& spec, const ConvexQuad& quad,
                         long n_mc, uint64_t seed) {
  if (n_mc < 1) throw ConfigError("estimate_coverage: n_mc must be >= 1");
  SampleSet s = sample(spec, size_t(n_mc), seed);
  return coverage_of(s.points, quad);
}

ExpertLabel generate_expert_label(const DistributionSpec& spec, double alpha,
                                  const LabelGenConfig& cfg, uint64_t seed) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidAlpha("alpha not in (0,1)");

  for (int retry = 0; retry <= cfg.max_retries; ++retry) {
    uint64_t s_expert = mix_seed(seed, uint64_t(retry) * 3 + 1);
    uint64_t s_calib = mix_seed(seed, uint64_t(retry) * 3 + 2);
    uint64_t s_final = mix_seed(seed, uint64_t(retry) * 3 + 3);

    SampleSet expert_set = sample(spec, size_t(cfg.expert_samples), s_expert);
    GridDensity grid = kde_grid_fft(expert_set, cfg.kde);
    SampleSet calib = sample(spec, size_t(cfg.n_mc), s_calib);

    // The greedy box grows monotonically with its mass target, so coverage
    // against the fixed calibration set is monotone and bisection applies.
    double lo = std::max(alpha - 0.05, 1e-4);
    double hi = std::min(alpha + 0.05, 0.9999);
    bool found = false;
    ConvexQuad quad{};
    for (int step = 0; step < cfg.max_bisect && !found; ++step) {
      double mid = 0.5 * (lo + hi);
      BoxResult box = ilp_heuristic(grid, mid);
      double cov = coverage_of(calib.points, box.quad);
      if (cov < alpha + cfg.band_lo) {
        lo = mid;
      } else if (cov > alpha + cfg.band_hi) {
        hi = mid;
      } else {
        quad = box.quad;
        found = true;
      }
    }
    if (!found) continue;

    double fresh = estimate_coverage(spec, quad, cfg.n_mc, s_final);
    if (fresh >= alpha && fresh <= alpha + 0.01) {
      ExpertLabel label;
      label.dist_id = spec.id;
      label.alpha = alpha;
      label.quad = quad;
      label.coverage_est = fresh;
      label.n_validation = cfg.n_mc;
      label.seed = seed;
      return label;
    }
  }
  throw CalibrationFailed("generate_expert_label: could not land coverage in "
                          "band after retries");
}

CorpusManifest manifest_from_json(const nlohmann::json& j,
                                  const std::string& dir) {
  CorpusManifest m;
  m.dir = dir;
  if (!j.contains("entries")) throw ConfigError("manifest missing entries");
  for (const auto& ej : j.at("entries")) {
    for (auto it = ej.begin(); it != ej.end(); ++it) {
      static const char* allowed[] = {"dist",        "alphas",
                                      "labels_per_alpha", "n_examples",
                                      "n_vis",       "labels_file",
                                      "examples_file", "seed"};
      bool ok = false;
      for (const char* k : allowed) {
        if (it.key() == k) ok = true;
      }
      if (!ok) throw ConfigError("manifest: unknown key " + it.key());
    }
    CorpusEntry e;
    e.spec = spec_from_json(ej.at("dist"));
    for (const auto& a : ej.at("alphas")) e.alphas.push_back(a.get<double>());
    if (e.alphas.empty()) throw ConfigError("manifest: empty alphas");
    for (double a : e.alphas) {
      if (!(a > 0.0) || !(a < 1.0)) throw ConfigError("manifest: bad alpha");
    }
    e.labels_per_alpha = ej.at("labels_per_alpha").get<int>();
    e.n_examples = ej.at("n_examples").get<long>();
    if (ej.contains("n_vis")) e.n_vis = ej.at("n_vis").get<int>();
    e.labels_file = ej.at("labels_file").get<std::string>();
    e.examples_file = ej.at("examples_file").get<std::string>();
    e.seed = ej.at("seed").get<uint64_t>();
    if (e.labels_per_alpha <= 0 || e.n_examples < 0 || e.n_vis < 2) {
      throw ConfigError("manifest: bad counts");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

CorpusManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return manifest_from_json(j, fs::path(path).parent_path().string());
}

namespace {

void save_status(const std::string& path, const nlohmann::json& status) {
  std::ofstream out(path);
  out << status.dump(2) << "\n";
}

// Returns true when the file is recorded in the status and its checksum still
// matches; throws when the record exists but the file is gone or stale.
bool verify_or_pending(const nlohmann::json& status, const fs::path& file,
                       const std::string& key) {
  if (!status["files"].contains(key)) return false;
  if (!fs::exists(file)) {
    throw Error("corpus file missing for completed entry: " + file.string());
  }
  if (crc32_file(file.string()) != status["files"][key].at("crc").get<uint32_t>()) {
    throw Error("checksum mismatch: " + file.string());
  }
  return true;
}

}  // namespace

std::vector<BuildProgress> build_corpus(const CorpusManifest& manifest,
                                        const std::string& manifest_path,
                                        const LabelGenConfig& cfg,
                                        bool verbose, bool labels_only) {
  std::string status_path = manifest_path + ".status.json";
  nlohmann::json status = load_status(status_path);
  if (!status.contains("files")) status["files"] = nlohmann::json::object();

  std::vector<BuildProgress> progress;
  for (size_t ei = 0; ei < manifest.entries.size(); ++ei) {
    const CorpusEntry& e = manifest.entries[ei];
    BuildProgress prog;
    fs::path labels_path = fs::path(manifest.dir) / e.labels_file;
    fs::path examples_path = fs::path(manifest.dir) / e.examples_file;

    if (verify_or_pending(status, labels_path, e.labels_file)) {
      prog.labels_skipped = true;
    } else {
      // Labels: one derived seed per (alpha index, label index).
      std::vector<ExpertLabel> labels;
      for (size_t ai = 0; ai < e.alphas.size(); ++ai) {
        for (int li = 0; li < e.labels_per_alpha; ++li) {
          uint64_t s = mix_seed(e.seed, 0x1000 + ai * 4096 + uint64_t(li));
          labels.push_back(generate_expert_label(e.spec, e.alphas[ai], cfg, s));
          ++prog.labels_done;
          if (verbose && prog.labels_done % 10 == 0) {
            std::cerr << "[corpus] " << e.spec.id << ": " << prog.labels_done
                      << " labels\n";
          }
        }
      }
      write_labels_jsonl(labels_path.string(), labels);
      status["files"][e.labels_file] = {
          {"crc", crc32_file(labels_path.string())}, {"count", labels.size()}};
      save_status(status_path, status);
    }

    if (labels_only) {
      progress.push_back(prog);
      continue;
    }

    if (verify_or_pending(status, examples_path, e.examples_file)) {
      prog.examples_skipped = true;
      progress.push_back(prog);
      continue;
    }

    // Examples: fresh small visible sets with per-example alpha draws.
    std::vector<TrainExample> examples;
    examples.reserve(size_t(e.n_examples));
    Rng alpha_rng(mix_seed(e.seed, 0xA1));
    for (long xi = 0; xi < e.n_examples; ++xi) {
      TrainExample ex;
      size_t ai = size_t(alpha_rng.uniform() * double(e.alphas.size()));
      ai = std::min(ai, e.alphas.size() - 1);
      ex.alpha = float(e.alphas[ai]);
      SampleSet s =
          sample(e.spec, size_t(e.n_vis), mix_seed(e.seed, 0x100000 + uint64_t(xi)));
      ex.points = std::move(s.points);
      examples.push_back(std::move(ex));
      ++prog.examples_done;
      if (verbose && prog.examples_done % 50000 == 0) {
        std::cerr << "[corpus] " << e.spec.id << ": " << prog.examples_done
                  << " examples\n";
      }
    }
    write_prsd(examples_path.string(), examples, uint32_t(e.n_vis));
    status["files"][e.examples_file] = {
        {"crc", crc32_file(examples_path.string())},
        {"count", examples.size()}};
    save_status(status_path, status);
    progress.push_back(prog);
  }
  return progress;
}

}  // namespace prs
