// Task generation and scoring: coverage MSE, correctness rate, area, timing.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "prs/distributions.hpp"
#include "prs/density.hpp"
#include "prs/geometry.hpp"
#include "prs/neural/model.hpp"

namespace prs {

struct EvalTask {
  DistributionSpec spec;
  double alpha = 0.0;
  SampleSet visible;
  uint64_t seed = 0;
};

enum class MethodKind { NN, ILP, BB, ORACLE };

// n_samples == 0 means the method consumes exactly the task's visible
// points; otherwise it draws that many fresh samples (the "20x" condition).
struct MethodSpec {
  MethodKind kind = MethodKind::ILP;
  int n_samples = 0;

  std::string name() const;
};
MethodSpec method_from_name(const std::string& name);

struct MethodResult {
  long task_id = 0;
  std::string method;
  double alpha = 0.0;
  double coverage = 0.0;  // Monte Carlo, seed disjoint from generation
  double area = 0.0;
  double micros = 0.0;  // generate path only
  bool degenerate = false;
};

struct ReportRow {
  std::string method;
  double alpha = 0.0;
  double mse = 0.0;  // mean (coverage - alpha)^2, degenerates counted as 0
  double cov_min = 0.0;
  double cov_max = 0.0;
  double correctness = 0.0;  // fraction with coverage >= alpha
  double mean_area = 0.0;    // over non-degenerate tasks
  double median_micros = 0.0;
  long n_tasks = 0;
  long n_degenerate = 0;
};

struct EvalConfig {
  KdeConfig kde;
  long n_mc = 100000;
};

// Fresh tasks with per-task derived seeds; seeds are disjoint from the
// corpus builder's streams.
std::vector<EvalTask> make_tasks(const DistributionSpec& spec,
                                 const std::vector<double>& alphas,
                                 int tasks_per_alpha, int n_vis,
                                 uint64_t seed);

// Runs one method on one task. `model` is required for NN and ignored
// otherwise. Timing covers KDE + box extraction for the grid methods and
// normalize + forward + denormalize for NN; sampling and the Monte Carlo
// coverage check sit outside the timed window. A hull-degenerate NN output
// is recorded with the degenerate flag, coverage 0 and area 0.
MethodResult run_method(const EvalTask& task, long task_id,
                        const MethodSpec& method, neural::Model<float>* model,
                        const EvalConfig& cfg);

// Pure fold of per-task rows into per-(method, alpha) aggregates, sorted by
// (method, alpha).
std::vector<ReportRow> score(const std::vector<MethodResult>& results);

// Median micros per method plus the ratio of every method against `baseline`.
struct TimingSummary {
  std::map<std::string, double> median_micros;
  std::map<std::string, double> ratio_vs_baseline;
};
TimingSummary timing_compare(const std::vector<MethodResult>& results,
                             const std::string& baseline);

void write_results_csv(const std::string& path,
                       const std::vector<MethodResult>& results);
std::vector<MethodResult> read_results_csv(const std::string& path);
void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows);

}  // namespace prs
