// prs: command-line surface for sampling, corpus building, training,
// inference, and evaluation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "prs/boxer.hpp"
#include "prs/corpus_io.hpp"
#include "prs/density.hpp"
#include "prs/distributions.hpp"
#include "prs/errors.hpp"
#include "prs/evalharness.hpp"
#include "prs/labelgen.hpp"
#include "prs/neural/trainer.hpp"
#include "prs/neural/weights_io.hpp"
#include "prs/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw prs::ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw prs::ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw prs::ConfigError(where + ": unknown key " + it.key());
    }
  }
}

prs::KdeConfig kde_from_json(const json& j) {
  expect_keys(j, {"grid_n", "fixed_bandwidth", "padding"}, "kde");
  prs::KdeConfig k;
  if (j.contains("grid_n")) k.grid_n = j.at("grid_n").get<int>();
  if (j.contains("fixed_bandwidth")) {
    k.fixed_bandwidth = j.at("fixed_bandwidth").get<double>();
  }
  if (j.contains("padding")) k.padding = j.at("padding").get<double>();
  return k;
}

prs::neural::ModelConfig model_from_json(const json& j) {
  expect_keys(j,
              {"embed_dim", "n_heads", "n_layers", "ffn_mult", "head_hidden",
               "max_points", "dropout"},
              "model");
  prs::neural::ModelConfig m;
  if (j.contains("embed_dim")) m.embed_dim = j.at("embed_dim").get<int>();
  if (j.contains("n_heads")) m.n_heads = j.at("n_heads").get<int>();
  if (j.contains("n_layers")) m.n_layers = j.at("n_layers").get<int>();
  if (j.contains("ffn_mult")) m.ffn_mult = j.at("ffn_mult").get<int>();
  if (j.contains("head_hidden")) m.head_hidden = j.at("head_hidden").get<int>();
  if (j.contains("max_points")) m.max_points = j.at("max_points").get<int>();
  if (j.contains("dropout")) m.dropout = j.at("dropout").get<float>();
  prs::neural::validate(m);
  return m;
}

prs::neural::TrainConfig train_from_json(const json& j) {
  expect_keys(j,
              {"batch_size", "lr_peak", "lr_floor", "warmup", "steps",
               "experts_per_batch", "seed", "checkpoint_every",
               "checkpoint_path", "loss_log_path"},
              "train");
  prs::neural::TrainConfig t;
  if (j.contains("batch_size")) t.batch_size = j.at("batch_size").get<int>();
  if (j.contains("lr_peak")) t.lr_peak = j.at("lr_peak").get<double>();
  if (j.contains("lr_floor")) t.lr_floor = j.at("lr_floor").get<double>();
  if (j.contains("warmup")) t.warmup = j.at("warmup").get<long>();
  if (j.contains("steps")) t.steps = j.at("steps").get<long>();
  if (j.contains("experts_per_batch")) {
    t.experts_per_batch = j.at("experts_per_batch").get<int>();
  }
  if (j.contains("seed")) t.seed = j.at("seed").get<uint64_t>();
  if (j.contains("checkpoint_every")) {
    t.checkpoint_every = j.at("checkpoint_every").get<long>();
  }
  if (j.contains("checkpoint_path")) {
    t.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  }
  if (j.contains("loss_log_path")) {
    t.loss_log_path = j.at("loss_log_path").get<std::string>();
  }
  return t;
}

std::vector<prs::Point2> read_points_file(const std::string& path) {
  try {
    if (fs::path(path).extension() == ".csv") {
      std::ifstream in(path);
      if (!in) throw prs::ConfigError("cannot open " + path);
      std::vector<prs::Point2> pts;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'x') continue;  // optional header
        auto comma = line.find(',');
        if (comma == std::string::npos) {
          throw prs::ConfigError("bad points row in " + path);
        }
        pts.push_back(
            {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
      }
      if (pts.size() < 2) throw prs::ConfigError("too few points in " + path);
      return pts;
    }
    auto sets = prs::read_prsd(path);
    if (sets.empty()) throw prs::ConfigError("no sets in " + path);
    return sets[0].points;
  } catch (const prs::BadMagic& e) {
    throw prs::ConfigError(std::string("malformed points file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw prs::ConfigError("non-numeric points row in " + path);
  }
}

int cmd_sample(const std::string& spec_path, long n, uint64_t seed,
               const std::string& out_path) {
  prs::DistributionSpec spec = prs::load_spec(spec_path);
  prs::SampleSet s = prs::sample(spec, size_t(n), seed);

  double mx = 0, my = 0;
  for (const auto& p : s.points) { mx += p.x; my += p.y; }
  mx /= double(n); my /= double(n);

  if (fs::path(out_path).extension() == ".csv") {
    std::ofstream out(out_path);
    if (!out) throw prs::Error("cannot open " + out_path + " for writing");
    out << "x,y\n";
    out.precision(17);
    for (const auto& p : s.points) out << p.x << "," << p.y << "\n";
  } else {
    prs::TrainExample ex;
    ex.alpha = 0.0f;
    ex.points = s.points;
    prs::write_prsd(out_path, {ex}, uint32_t(n));
  }

  std::cerr << "sampled " << n << " points from " << spec.id << " -> "
            << out_path << " (mean " << mx << ", " << my << ")\n";
  json summary = {{"n", n}, {"dist", spec.id}, {"out", out_path},
                  {"mean", {mx, my}}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_build(const std::string& manifest_path, bool labels_only,
              bool verbose, int expert_samples, long n_mc) {
  prs::CorpusManifest m = prs::load_manifest(manifest_path);
  prs::LabelGenConfig cfg;
  cfg.expert_samples = expert_samples;
  cfg.n_mc = n_mc;
  auto progress = prs::build_corpus(m, manifest_path, cfg, verbose, labels_only);
  long labels = 0, examples = 0;
  for (const auto& p : progress) {
    labels += p.labels_done;
    examples += p.examples_done;
  }
  std::cerr << "corpus complete: " << labels << " new labels, " << examples
            << " new examples\n";
  json summary = {{"entries", progress.size()}, {"new_labels", labels},
                  {"new_examples", examples}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_path) {
  json j = load_json(config_path);
  expect_keys(j, {"examples_file", "labels_file", "model", "train"}, "config");
  std::string examples_file = j.at("examples_file").get<std::string>();
  std::string labels_file = j.at("labels_file").get<std::string>();
  prs::neural::ModelConfig mcfg =
      j.contains("model") ? model_from_json(j.at("model"))
                          : prs::neural::ModelConfig{};
  prs::neural::TrainConfig tcfg =
      j.contains("train") ? train_from_json(j.at("train"))
                          : prs::neural::TrainConfig{};

  auto corpus = prs::read_prsd(examples_file);
  auto labels = prs::read_labels_jsonl(labels_file);
  prs::neural::TrainData data = prs::neural::prepare_train_data(corpus, labels);
  std::cerr << "train data: " << data.examples.size() << " examples, "
            << data.n_vis << " visible points each\n";

  prs::neural::Trainer trainer(mcfg, tcfg, std::move(data));
  if (!tcfg.checkpoint_path.empty() && fs::exists(tcfg.checkpoint_path)) {
    trainer.load_checkpoint(tcfg.checkpoint_path);
    std::cerr << "resumed from step " << trainer.current_step() << "\n";
  }
  while (trainer.current_step() < tcfg.steps) {
    prs::neural::StepMetrics m = trainer.step();
    trainer.append_loss_log(m);
    if (m.step % 500 == 0) {
      std::cerr << "step " << m.step << " lr " << m.lr << " loss " << m.loss
                << "\n";
    }
  }
  prs::neural::save_weights(trainer.model().weights(), out_path);
  std::cerr << "saved weights -> " << out_path << "\n";
  json summary = {{"steps", trainer.current_step()}, {"out", out_path}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_infer(const std::string& weights_path, double alpha,
              const std::string& points_path, const std::string& svg_path) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw prs::ConfigError("alpha must be in (0,1)");
  }
  prs::neural::Model<float> model = prs::neural::load_model(weights_path);
  prs::SampleSet s;
  s.points = read_points_file(points_path);
  prs::ConvexQuad quad = prs::neural::infer_quad(model, alpha, s);
  if (!svg_path.empty()) prs::svg_overlay(svg_path, s.points, quad);

  json verts = json::array();
  for (const auto& v : quad.vertices) verts.push_back({v.x, v.y});
  json out = {{"alpha", alpha}, {"vertices", verts},
              {"area", prs::area(quad)}};
  std::cout << out.dump() << "\n";
  std::cerr << "quad area " << prs::area(quad) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_path) {
  json j = load_json(config_path);
  expect_keys(j,
              {"dist", "alphas", "tasks_per_alpha", "n_vis", "methods",
               "weights", "seed", "kde", "n_mc"},
              "eval config");
  prs::DistributionSpec spec = prs::spec_from_json(j.at("dist"));
  std::vector<double> alphas = j.at("alphas").get<std::vector<double>>();
  int tasks_per_alpha =
      j.contains("tasks_per_alpha") ? j.at("tasks_per_alpha").get<int>() : 200;
  int n_vis = j.contains("n_vis") ? j.at("n_vis").get<int>() : 100;
  uint64_t seed = j.contains("seed") ? j.at("seed").get<uint64_t>() : 1;
  prs::EvalConfig ecfg;
  if (j.contains("kde")) ecfg.kde = kde_from_json(j.at("kde"));
  if (j.contains("n_mc")) ecfg.n_mc = j.at("n_mc").get<long>();

  std::vector<prs::MethodSpec> methods;
  for (const auto& mj : j.at("methods")) {
    methods.push_back(prs::method_from_name(mj.get<std::string>()));
  }
  if (methods.empty()) throw prs::ConfigError("eval config: no methods");

  // NN weights are loaded before any task runs so a missing file fails fast.
  std::optional<prs::neural::Model<float>> model;
  for (const auto& m : methods) {
    if (m.kind == prs::MethodKind::NN) {
      if (!j.contains("weights")) {
        throw prs::Error("eval config: NN method without weights file");
      }
      model.emplace(
          prs::neural::load_model(j.at("weights").get<std::string>()));
      break;
    }
  }

  auto tasks = prs::make_tasks(spec, alphas, tasks_per_alpha, n_vis, seed);
  std::vector<prs::MethodResult> results;
  results.reserve(tasks.size() * methods.size());
  for (size_t ti = 0; ti < tasks.size(); ++ti) {
    for (const auto& m : methods) {
      results.push_back(prs::run_method(tasks[ti], long(ti), m,
                                        model ? &*model : nullptr, ecfg));
    }
    if ((ti + 1) % 50 == 0) {
      std::cerr << "evaluated " << (ti + 1) << "/" << tasks.size()
                << " tasks\n";
    }
  }
  prs::write_results_csv(out_path, results);
  std::cerr << "wrote " << results.size() << " rows -> " << out_path << "\n";
  json summary = {{"tasks", tasks.size()}, {"rows", results.size()},
                  {"out", out_path}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_report(const std::string& results_path, const std::string& out_path,
               const std::string& svg_dir) {
  auto results = prs::read_results_csv(results_path);
  if (results.empty()) throw prs::Error("no rows in " + results_path);
  auto rows = prs::score(results);
  prs::write_report_csv(out_path, rows);

  if (!svg_dir.empty()) {
    fs::create_directories(svg_dir);
    std::vector<std::string> labels;
    std::vector<double> medians;
    std::set<std::string> methods;
    for (const auto& r : rows) methods.insert(r.method);
    for (const auto& m : methods) {
      std::vector<double> t;
      for (const auto& r : results) {
        if (r.method == m) t.push_back(r.micros);
      }
      std::sort(t.begin(), t.end());
      labels.push_back(m);
      medians.push_back(t[t.size() / 2]);
    }
    prs::svg_bar_chart((fs::path(svg_dir) / "time_comparison.svg").string(),
                       labels, medians, "median generation time (us)");
    std::set<double> alphas;
    for (const auto& r : rows) alphas.insert(r.alpha);
    for (double a : alphas) {
      std::vector<double> covs;
      for (const auto& r : results) {
        if (r.alpha == a) covs.push_back(r.coverage);
      }
      std::ostringstream name;
      name << "coverage_hist_a" << int(std::lround(a * 100)) << ".svg";
      prs::svg_histogram((fs::path(svg_dir) / name.str()).string(), covs, 20,
                         "coverage at alpha " + std::to_string(a));
    }
  }

  std::cerr << "report: " << rows.size() << " rows -> " << out_path << "\n";
  json summary = {{"rows", rows.size()}, {"out", out_path}};
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex probabilistic reachable set toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out_path, manifest_path, config_path, weights_path;
  std::string points_path, svg_path, results_path, svg_dir;
  long n = 0;
  uint64_t seed = 1;
  double alpha = 0.9;
  bool verbose = false;
  int expert_samples = 10000;
  long n_mc = 100000;
  int rc = 0;

  auto* c_sample = app.add_subcommand("sample", "draw samples from a spec");
  c_sample->add_option("--spec", spec_path)->required();
  c_sample->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  c_sample->add_option("--seed", seed);
  c_sample->add_option("--out", out_path)->required();
  c_sample->callback([&] { rc = cmd_sample(spec_path, n, seed, out_path); });

  auto* c_labels = app.add_subcommand("make-labels", "build label pools only");
  auto* c_corpus =
      app.add_subcommand("build-corpus", "build label pools and examples");
  for (auto* c : {c_labels, c_corpus}) {
    c->add_option("--manifest", manifest_path)->required();
    c->add_flag("--verbose", verbose);
    c->add_option("--expert-samples", expert_samples);
    c->add_option("--mc", n_mc);
  }
  c_labels->callback([&] {
    rc = cmd_build(manifest_path, true, verbose, expert_samples, n_mc);
  });
  c_corpus->callback([&] {
    rc = cmd_build(manifest_path, false, verbose, expert_samples, n_mc);
  });

  auto* c_train = app.add_subcommand("train", "train the imitator");
  c_train->add_option("--config", config_path)->required();
  c_train->add_option("--out", out_path)->required();
  c_train->callback([&] { rc = cmd_train(config_path, out_path); });

  auto* c_infer = app.add_subcommand("infer", "predict a quad for a point set");
  c_infer->add_option("--weights", weights_path)->required();
  c_infer->add_option("--alpha", alpha)->required();
  c_infer->add_option("--points", points_path)->required();
  c_infer->add_option("--svg", svg_path);
  c_infer->callback(
      [&] { rc = cmd_infer(weights_path, alpha, points_path, svg_path); });

  auto* c_eval = app.add_subcommand("evaluate", "run methods over fresh tasks");
  c_eval->add_option("--config", config_path)->required();
  c_eval->add_option("--out", out_path)->required();
  c_eval->callback([&] { rc = cmd_evaluate(config_path, out_path); });

  auto* c_report =
      app.add_subcommand("report", "fold per-task results into a report");
  c_report->add_option("--results", results_path)->required();
  c_report->add_option("--out", out_path)->required();
  c_report->add_option("--svg-dir", svg_dir);
  c_report->callback([&] { rc = cmd_report(results_path, out_path, svg_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const prs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const prs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
