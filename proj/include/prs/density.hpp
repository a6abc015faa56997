// Grid kernel density estimation, direct and FFT-accelerated.
#pragma once

#include <string>
#include <vector>

#include "prs/geometry.hpp"

namespace prs {

// n x n weight matrix with world-coordinate grid geometry. Row index i runs
// along y, column index j along x; weights[i * n + j] belongs to the cell
// whose lower-left corner is (origin.x + j * cell_w, origin.y + i * cell_h).
struct GridDensity {
  int n = 0;
  Point2 origin;
  double cell_w = 0.0;
  double cell_h = 0.0;
  std::vector<double> weights;  // row-major, n * n

  double at(int i, int j) const { return weights[size_t(i) * n + j]; }
  double& at(int i, int j) { return weights[size_t(i) * n + j]; }
  Point2 cell_center(int i, int j) const {
    return {origin.x + (j + 0.5) * cell_w, origin.y + (i + 0.5) * cell_h};
  }
  double total_mass() const;
};

struct KdeConfig {
  int grid_n = 128;          // power of two when the FFT path is used
  double fixed_bandwidth = 0.0;  // > 0 overrides the Silverman rule
  double padding = 3.0;          // window margin, in bandwidths
};

// 2D Silverman-style rule: h = ((sx + sy) / 2) * |s|^(-1/6).
double bandwidth_silverman(const SampleSet& s);

// Both paths bin the samples onto the grid with bilinear weight assignment
// and then convolve with the sampled Gaussian kernel; the grid window is the
// sample bounding box expanded by `padding` bandwidths. Direct is the dense
// O(n^2 * |s|) reference, FFT uses zero-padded convolution and matches it to
// ~1e-12 relative.
GridDensity kde_grid_direct(const SampleSet& s, const KdeConfig& cfg);
GridDensity kde_grid_fft(const SampleSet& s, const KdeConfig& cfg);

// Row-major CSV with a header carrying the grid geometry.
void write_csv(const GridDensity& g, const std::string& path);

}  // namespace prs
