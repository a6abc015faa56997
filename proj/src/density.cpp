#include "prs/density.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <memory>

#include "prs/errors.hpp"

namespace prs {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GridGeom {
  Point2 origin;
  double cell_w, cell_h;
  double h;  // bandwidth
};

double resolve_bandwidth(const SampleSet& s, const KdeConfig& cfg) {
  double h = cfg.fixed_bandwidth > 0.0 ? cfg.fixed_bandwidth
                                       : bandwidth_silverman(s);
  if (!(h > 0.0)) throw ConfigError("kde: bandwidth must be > 0");
  return h;
}

GridGeom make_geom(const SampleSet& s, const KdeConfig& cfg, double h) {
  NormalizationFrame f = fit_frame(s);
  double pad = cfg.padding * h;
  GridGeom g;
  g.h = h;
  g.origin = {f.min_x - pad, f.min_y - pad};
  g.cell_w = (f.width() + 2.0 * pad) / cfg.grid_n;
  g.cell_h = (f.height() + 2.0 * pad) / cfg.grid_n;
  return g;
}

// Bilinear assignment of unit sample mass onto cell centers.
std::vector<double> bin_samples(const SampleSet& s, const GridGeom& geom,
                                int n) {
  std::vector<double> bins(size_t(n) * n, 0.0);
  auto deposit = [&](int i, int j, double w) {
    i = std::min(std::max(i, 0), n - 1);
    j = std::min(std::max(j, 0), n - 1);
    bins[size_t(i) * n + j] += w;
  };
  for (const Point2& p : s.points) {
    double u = (p.x - geom.origin.x) / geom.cell_w - 0.5;
    double v = (p.y - geom.origin.y) / geom.cell_h - 0.5;
    int j0 = int(std::floor(u));
    int i0 = int(std::floor(v));
    double fx = u - j0;
    double fy = v - i0;
    deposit(i0, j0, (1.0 - fy) * (1.0 - fx));
    deposit(i0, j0 + 1, (1.0 - fy) * fx);
    deposit(i0 + 1, j0, fy * (1.0 - fx));
    deposit(i0 + 1, j0 + 1, fy * fx);
  }
  return bins;
}

double kernel_value(int di, int dj, const GridGeom& geom) {
  double dx = dj * geom.cell_w;
  double dy = di * geom.cell_h;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * geom.h * geom.h)) /
         (2.0 * kPi * geom.h * geom.h);
}

void check_cfg(const KdeConfig& cfg, bool fft) {
  if (cfg.grid_n < 8) throw ConfigError("kde: grid_n must be >= 8");
  if (fft && (cfg.grid_n & (cfg.grid_n - 1)) != 0) {
    throw ConfigError("kde: grid_n must be a power of two for the FFT path");
  }
}

// FFTW plans and buffers for one padded size, reused across calls.
struct FftWorkspace {
  int m = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* kspec = nullptr;
  fftw_plan fwd{}, inv{};

  explicit FftWorkspace(int m_) : m(m_) {
    real = fftw_alloc_real(size_t(m) * m);
    spec = fftw_alloc_complex(size_t(m) * (m / 2 + 1));
    kspec = fftw_alloc_complex(size_t(m) * (m / 2 + 1));
    fwd = fftw_plan_dft_r2c_2d(m, m, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(m, m, spec, real, FFTW_ESTIMATE);
  }
  ~FftWorkspace() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(kspec);
  }
};

FftWorkspace& workspace_for(int m) {
  static std::map<int, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<FftWorkspace>(m);
  return *slot;
}

}  // namespace

double GridDensity::total_mass() const {
  double acc = 0.0, c = 0.0;
  for (double w : weights) {  // Kahan; totals feed tight mass thresholds
    double y = w - c;
    double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  return acc;
}

double bandwidth_silverman(const SampleSet& s) {
  if (s.points.size() < 2) {
    throw DegenerateFrame("bandwidth_silverman: need >= 2 points");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : s.points) {
    mx += p.x;
    my += p.y;
  }
  size_t n = s.points.size();
  mx /= double(n);
  my /= double(n);
  double vx = 0.0, vy = 0.0;
  for (const auto& p : s.points) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  vx /= double(n - 1);
  vy /= double(n - 1);
  double h = 0.5 * (std::sqrt(vx) + std::sqrt(vy)) *
             std::pow(double(n), -1.0 / 6.0);
  if (!(h > 0.0)) throw DegenerateFrame("bandwidth_silverman: zero variance");
  return h;
}

GridDensity kde_grid_direct(const SampleSet& s, const KdeConfig& cfg) {
  check_cfg(cfg, false);
  double h = resolve_bandwidth(s, cfg);
  GridGeom geom = make_geom(s, cfg, h);
  int n = cfg.grid_n;
  std::vector<double> bins = bin_samples(s, geom, n);

  GridDensity out;
  out.n = n;
  out.origin = geom.origin;
  out.cell_w = geom.cell_w;
  out.cell_h = geom.cell_h;
  out.weights.assign(size_t(n) * n, 0.0);

  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      double b = bins[size_t(k) * n + l];
      if (b == 0.0) continue;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          out.at(i, j) += b * kernel_value(i - k, j - l, geom);
        }
      }
    }
  }
  return out;
}

GridDensity kde_grid_fft(const SampleSet& s, const KdeConfig& cfg) {
  check_cfg(cfg, true);
  double h = resolve_bandwidth(s, cfg);
  GridGeom geom = make_geom(s, cfg, h);
  int n = cfg.grid_n;
  int m = 2 * n;  // zero padding: no wrap-around contamination
  std::vector<double> bins = bin_samples(s, geom, n);

  FftWorkspace& ws = workspace_for(m);
  size_t spec_len = size_t(m) * (m / 2 + 1);

  // Kernel, center wrapped to index 0. The Gaussian separates, so one exp
  // per axis offset instead of one per cell.
  std::fill(ws.real, ws.real + size_t(m) * m, 0.0);
  std::vector<double> kx(size_t(n), 0.0), ky(size_t(n), 0.0);
  double inv2h2 = 1.0 / (2.0 * geom.h * geom.h);
  double norm = 1.0 / (2.0 * kPi * geom.h * geom.h);
  for (int d = 0; d < n; ++d) {
    kx[size_t(d)] = std::exp(-(d * geom.cell_w) * (d * geom.cell_w) * inv2h2);
    ky[size_t(d)] = std::exp(-(d * geom.cell_h) * (d * geom.cell_h) * inv2h2);
  }
  for (int di = -(n - 1); di <= n - 1; ++di) {
    int row = (di + m) % m;
    double kr = ky[size_t(std::abs(di))] * norm;
    for (int dj = -(n - 1); dj <= n - 1; ++dj) {
      int col = (dj + m) % m;
      ws.real[size_t(row) * m + col] = kr * kx[size_t(std::abs(dj))];
    }
  }
  fftw_execute_dft_r2c(ws.fwd, ws.real, ws.kspec);

  std::fill(ws.real, ws.real + size_t(m) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      ws.real[size_t(i) * m + j] = bins[size_t(i) * n + j];
    }
  }
  fftw_execute_dft_r2c(ws.fwd, ws.real, ws.spec);

  for (size_t i = 0; i < spec_len; ++i) {
    double ar = ws.spec[i][0], ai = ws.spec[i][1];
    double br = ws.kspec[i][0], bi = ws.kspec[i][1];
    ws.spec[i][0] = ar * br - ai * bi;
    ws.spec[i][1] = ar * bi + ai * br;
  }
  fftw_execute_dft_c2r(ws.inv, ws.spec, ws.real);

  GridDensity out;
  out.n = n;
  out.origin = geom.origin;
  out.cell_w = geom.cell_w;
  out.cell_h = geom.cell_h;
  out.weights.assign(size_t(n) * n, 0.0);
  double scale = 1.0 / (double(m) * double(m));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Convolution output can dip a hair below zero in round-off.
      out.at(i, j) = std::max(0.0, ws.real[size_t(i) * m + j] * scale);
    }
  }
  return out;
}

void write_csv(const GridDensity& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "# n=" << g.n << " origin_x=" << g.origin.x
      << " origin_y=" << g.origin.y << " cell_w=" << g.cell_w
      << " cell_h=" << g.cell_h << "\n";
  out.precision(17);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      out << g.at(i, j) << (j + 1 == g.n ? '\n' : ',');
    }
  }
}

}  // namespace prs
