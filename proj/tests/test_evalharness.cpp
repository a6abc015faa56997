#include <filesystem>

#include "doctest.h"
#include "prs/errors.hpp"
#include "prs/evalharness.hpp"
#include "prs/neural/weights_io.hpp"

using namespace prs;
namespace fs = std::filesystem;

namespace {

DistributionSpec binomial_spec() {
  DistributionSpec s;
  s.dist = BinomialSpec{};
  s.id = "binomial";
  return s;
}

EvalConfig fast_cfg() {
  EvalConfig cfg;
  cfg.kde.grid_n = 32;
  cfg.n_mc = 5000;
  return cfg;
}

MethodResult row(const std::string& method, double alpha, double coverage,
                 double micros = 10.0) {
  MethodResult r;
  r.method = method;
  r.alpha = alpha;
  r.coverage = coverage;
  r.area = 1.0;
  r.micros = micros;
  return r;
}

std::string tmp_path(const std::string& name) {
  fs::create_directories(PRS_TEST_TMP);
  return (fs::path(PRS_TEST_TMP) / name).string();
}

}  // namespace

TEST_SUITE_BEGIN("evalharness");

TEST_CASE("method names parse and print consistently") {
  CHECK(method_from_name("NN").kind == MethodKind::NN);
  CHECK(method_from_name("ILP").n_samples == 0);
  MethodSpec m = method_from_name("ILP(2000)");
  CHECK(m.kind == MethodKind::ILP);
  CHECK(m.n_samples == 2000);
  CHECK(m.name() == "ILP(2000)");
  CHECK(method_from_name("BB(100)").name() == "BB(100)");
  CHECK(method_from_name("ORACLE").kind == MethodKind::ORACLE);
  CHECK_THROWS_AS(method_from_name("XYZ"), ConfigError);
  CHECK_THROWS_AS(method_from_name("NN(5)"), ConfigError);
}

TEST_CASE("score arithmetic on trivial inputs") {
  std::vector<MethodResult> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(row("ILP", 0.9, 0.9));
  auto rows = score(rs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mse == 0.0);
  CHECK(rows[0].correctness == 1.0);
  CHECK(rows[0].n_tasks == 10);

  rs.clear();
  rs.push_back(row("ILP", 0.9, 0.89));
  rs.push_back(row("ILP", 0.9, 0.91));
  rows = score(rs);
  CHECK(rows[0].mse == doctest::Approx(1e-4));
  CHECK(rows[0].correctness == doctest::Approx(0.5));
  CHECK(rows[0].cov_min == doctest::Approx(0.89));
  CHECK(rows[0].cov_max == doctest::Approx(0.91));
}

TEST_CASE("report row count is methods times alphas") {
  std::vector<MethodResult> rs;
  for (const char* m : {"NN", "ILP", "BB"}) {
    for (double a : {0.8, 0.9, 0.95}) {
      rs.push_back(row(m, a, a + 0.005));
    }
  }
  CHECK(score(rs).size() == 9);
}

TEST_CASE("tasks are deterministic and methods reproduce on equal seeds") {
  auto tasks = make_tasks(binomial_spec(), {0.9}, 2, 60, 42);
  auto tasks2 = make_tasks(binomial_spec(), {0.9}, 2, 60, 42);
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].visible.points[5].x == tasks2[0].visible.points[5].x);

  EvalConfig cfg = fast_cfg();
  MethodResult a = run_method(tasks[0], 0, method_from_name("ILP"), nullptr, cfg);
  MethodResult b = run_method(tasks[0], 0, method_from_name("ILP"), nullptr, cfg);
  CHECK(a.coverage == b.coverage);
  CHECK(a.area == b.area);
  CHECK_FALSE(a.degenerate);
  CHECK(a.micros > 0.0);

  MethodResult oracle =
      run_method(tasks[0], 0, method_from_name("ORACLE"), nullptr, cfg);
  CHECK(oracle.area <= a.area + 1e-12);

  MethodResult big =
      run_method(tasks[0], 0, method_from_name("ILP(500)"), nullptr, cfg);
  CHECK(big.coverage > 0.5);
}

TEST_CASE("the NN method runs through infer_quad") {
  neural::ModelConfig mc;
  mc.embed_dim = 16;
  mc.n_heads = 2;
  mc.n_layers = 1;
  mc.head_hidden = 16;
  mc.max_points = 128;
  neural::Model<float> model(mc);
  model.weights().init(3);
  auto tasks = make_tasks(binomial_spec(), {0.9}, 1, 60, 43);
  EvalConfig cfg = fast_cfg();
  MethodResult r = run_method(tasks[0], 0, method_from_name("NN"), &model, cfg);
  CHECK((r.degenerate || r.area > 0.0));
  CHECK_THROWS_AS(run_method(tasks[0], 0, method_from_name("NN"), nullptr, cfg),
                  ConfigError);
}

TEST_CASE("results CSV round-trips and the report is a pure fold") {
  std::vector<MethodResult> rs;
  Rng rng(77);
  long id = 0;
  for (const char* m : {"ILP", "BB"}) {
    for (double a : {0.8, 0.9}) {
      for (int i = 0; i < 5; ++i) {
        MethodResult r = row(m, a, a + 0.02 * (rng.uniform() - 0.5),
                             100.0 * rng.uniform());
        r.task_id = id++;
        r.degenerate = false;
        rs.push_back(r);
      }
    }
  }
  std::string path = tmp_path("results.csv");
  write_results_csv(path, rs);
  auto loaded = read_results_csv(path);
  REQUIRE(loaded.size() == rs.size());
  for (size_t i = 0; i < rs.size(); ++i) {
    CHECK(loaded[i].coverage == rs[i].coverage);
    CHECK(loaded[i].micros == rs[i].micros);
    CHECK(loaded[i].method == rs[i].method);
  }
  auto r1 = score(rs);
  auto r2 = score(loaded);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].mse == r2[i].mse);
    CHECK(r1[i].correctness == r2[i].correctness);
    CHECK(r1[i].median_micros == r2[i].median_micros);
  }

  std::string rpath = tmp_path("report.csv");
  write_report_csv(rpath, r1);
  CHECK(fs::file_size(rpath) > 0);
}

TEST_CASE("timing summary reports medians and baseline ratios") {
  std::vector<MethodResult> rs;
  for (int i = 0; i < 101; ++i) {
    rs.push_back(row("NN", 0.9, 0.9, 10.0 + i * 0.01));
    rs.push_back(row("ILP", 0.9, 0.9, 100.0 + i * 0.1));
  }
  TimingSummary s = timing_compare(rs, "ILP");
  CHECK(s.ratio_vs_baseline.at("ILP") == doctest::Approx(1.0));
  CHECK(s.ratio_vs_baseline.at("NN") < 0.2);
  CHECK_THROWS_AS(timing_compare(rs, "BB"), ConfigError);
}

TEST_SUITE_END();
