#include "prs/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prs/boxer.hpp"
#include "prs/errors.hpp"
#include "prs/labelgen.hpp"
#include "prs/neural/weights_io.hpp"

namespace prs {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + long(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + long(mid) - 1, v.end());
  return 0.5 * (v[mid - 1] + hi);
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string MethodSpec::name() const {
  std::string base;
  switch (kind) {
    case MethodKind::NN: base = "NN"; break;
    case MethodKind::ILP: base = "ILP"; break;
    case MethodKind::BB: base = "BB"; break;
    case MethodKind::ORACLE: base = "ORACLE"; break;
  }
  if (n_samples > 0) base += "(" + std::to_string(n_samples) + ")";
  return base;
}

MethodSpec method_from_name(const std::string& name) {
  MethodSpec m;
  std::string base = name;
  auto paren = name.find('(');
  if (paren != std::string::npos) {
    if (name.back() != ')') throw ConfigError("bad method name: " + name);
    base = name.substr(0, paren);
    m.n_samples = std::stoi(name.substr(paren + 1));
    if (m.n_samples <= 0) throw ConfigError("bad method count: " + name);
  }
  if (base == "NN") m.kind = MethodKind::NN;
  else if (base == "ILP") m.kind = MethodKind::ILP;
  else if (base == "BB") m.kind = MethodKind::BB;
  else if (base == "ORACLE") m.kind = MethodKind::ORACLE;
  else throw ConfigError("unknown method: " + name);
  if (m.kind == MethodKind::NN && m.n_samples > 0) {
    throw ConfigError("NN takes no sample count");
  }
  return m;
}

std::vector<EvalTask> make_tasks(const DistributionSpec& spec,
                                 const std::vector<double>& alphas,
                                 int tasks_per_alpha, int n_vis,
                                 uint64_t seed) {
  if (tasks_per_alpha < 1 || n_vis < 2) throw ConfigError("bad task counts");
  std::vector<EvalTask> tasks;
  tasks.reserve(alphas.size() * size_t(tasks_per_alpha));
  for (size_t ai = 0; ai < alphas.size(); ++ai) {
    if (!(alphas[ai] > 0.0) || !(alphas[ai] < 1.0)) {
      throw InvalidAlpha("eval alpha not in (0,1)");
    }
    for (int ti = 0; ti < tasks_per_alpha; ++ti) {
      EvalTask t;
      t.spec = spec;
      t.alpha = alphas[ai];
      t.seed = mix_seed(seed, 0xE7A50000 + ai * 100000 + uint64_t(ti));
      t.visible = sample(spec, size_t(n_vis), mix_seed(t.seed, 1));
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

MethodResult run_method(const EvalTask& task, long task_id,
                        const MethodSpec& method, neural::Model<float>* model,
                        const EvalConfig& cfg) {
  using clock = std::chrono::steady_clock;
  MethodResult res;
  res.task_id = task_id;
  res.method = method.name();
  res.alpha = task.alpha;

  // Input prep (fresh sampling for the n-sample variants) stays untimed.
  const SampleSet* input = &task.visible;
  SampleSet fresh;
  if (method.kind != MethodKind::NN && method.n_samples > 0 &&
      method.n_samples != int(task.visible.size())) {
    fresh = sample(task.spec, size_t(method.n_samples), mix_seed(task.seed, 2));
    input = &fresh;
  }

  ConvexQuad quad{};
  bool ok = true;
  auto t0 = clock::now();
  if (method.kind == MethodKind::NN) {
    if (model == nullptr) throw ConfigError("NN method needs model weights");
    try {
      quad = neural::infer_quad(*model, task.alpha, task.visible);
    } catch (const DegenerateQuad&) {
      ok = false;
    }
  } else {
    GridDensity grid = kde_grid_fft(*input, cfg.kde);
    BoxResult box;
    switch (method.kind) {
      case MethodKind::ILP: box = ilp_heuristic(grid, task.alpha); break;
      case MethodKind::BB: box = bounding_box(grid, task.alpha); break;
      case MethodKind::ORACLE: box = optimal_box(grid, task.alpha); break;
      default: break;
    }
    quad = box.quad;
  }
  auto t1 = clock::now();
  res.micros =
      std::chrono::duration<double, std::micro>(t1 - t0).count();

  res.degenerate = !ok;
  if (ok) {
    res.coverage =
        estimate_coverage(task.spec, quad, cfg.n_mc, mix_seed(task.seed, 3));
    res.area = area(quad);
  }
  return res;
}

std::vector<ReportRow> score(const std::vector<MethodResult>& results) {
  std::map<std::pair<std::string, double>, std::vector<const MethodResult*>>
      groups;
  for (const auto& r : results) groups[{r.method, r.alpha}].push_back(&r);

  std::vector<ReportRow> rows;
  for (const auto& [key, rs] : groups) {
    ReportRow row;
    row.method = key.first;
    row.alpha = key.second;
    row.n_tasks = long(rs.size());
    row.cov_min = 1.0;
    row.cov_max = 0.0;
    std::vector<double> times;
    double area_sum = 0.0;
    long area_n = 0;
    for (const MethodResult* r : rs) {
      double d = r->coverage - row.alpha;
      row.mse += d * d;
      row.cov_min = std::min(row.cov_min, r->coverage);
      row.cov_max = std::max(row.cov_max, r->coverage);
      if (r->coverage >= row.alpha) row.correctness += 1.0;
      if (r->degenerate) {
        ++row.n_degenerate;
      } else {
        area_sum += r->area;
        ++area_n;
      }
      times.push_back(r->micros);
    }
    row.mse /= double(rs.size());
    row.correctness /= double(rs.size());
    row.mean_area = area_n > 0 ? area_sum / double(area_n) : 0.0;
    row.median_micros = median(std::move(times));
    rows.push_back(row);
  }
  return rows;
}

TimingSummary timing_compare(const std::vector<MethodResult>& results,
                             const std::string& baseline) {
  std::map<std::string, std::vector<double>> times;
  for (const auto& r : results) times[r.method].push_back(r.micros);
  TimingSummary s;
  for (auto& [m, v] : times) s.median_micros[m] = median(std::move(v));
  auto it = s.median_micros.find(baseline);
  if (it == s.median_micros.end()) {
    throw ConfigError("timing baseline has no results: " + baseline);
  }
  for (const auto& [m, t] : s.median_micros) {
    s.ratio_vs_baseline[m] = t / it->second;
  }
  return s;
}

void write_results_csv(const std::string& path,
                       const std::vector<MethodResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "task_id,method,alpha,coverage,area,micros,degenerate\n";
  for (const auto& r : results) {
    out << r.task_id << "," << r.method << "," << fmt_g17(r.alpha) << ","
        << fmt_g17(r.coverage) << "," << fmt_g17(r.area) << ","
        << fmt_g17(r.micros) << "," << (r.degenerate ? 1 : 0) << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<MethodResult> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "task_id,method,alpha,coverage,area,micros,degenerate") {
    throw Error("bad results CSV header in " + path);
  }
  std::vector<MethodResult> results;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    MethodResult r;
    std::string field;
    auto next = [&] {
      if (!std::getline(ss, field, ',')) {
        throw Error("short results row in " + path);
      }
      return field;
    };
    r.task_id = std::stol(next());
    r.method = next();
    r.alpha = std::stod(next());
    r.coverage = std::stod(next());
    r.area = std::stod(next());
    r.micros = std::stod(next());
    r.degenerate = std::stoi(next()) != 0;
    results.push_back(std::move(r));
  }
  return results;
}

void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "method,alpha,mse,cov_min,cov_max,correctness,mean_area,"
         "median_micros,n_tasks,n_degenerate\n";
  for (const auto& r : rows) {
    out << r.method << "," << fmt_g17(r.alpha) << "," << fmt_g17(r.mse) << ","
        << fmt_g17(r.cov_min) << "," << fmt_g17(r.cov_max) << ","
        << fmt_g17(r.correctness) << "," << fmt_g17(r.mean_area) << ","
        << fmt_g17(r.median_micros) << "," << r.n_tasks << ","
        << r.n_degenerate << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace prs
