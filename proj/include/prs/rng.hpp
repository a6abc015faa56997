// Seeded RNG with explicit state and stable stream derivation.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace prs {

// Stable 64-bit mix used to derive independent stream seeds from a base
// seed plus a stream index. splitmix64 finalizer.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Thin wrapper around mt19937_64 with hand-rolled transforms so draws are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  Rng(uint64_t seed, uint64_t stream) : gen_(mix_seed(seed, stream)) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call; the second branch
  // of the pair is discarded to keep the stream position predictable).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  uint64_t next_u64() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace prs
