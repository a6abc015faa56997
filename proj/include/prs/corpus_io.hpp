// On-disk formats: PRSD example files, JSONL label pools, CRC32.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prs/geometry.hpp"
#include "prs/labelgen.hpp"

namespace prs {

// One training example: target confidence level plus the visible points.
struct TrainExample {
  float alpha = 0.0f;
  std::vector<Point2> points;
};

// PRSD binary layout (all little-endian):
//   magic "PRSD", version u32, n_sets u32, n_points u32, dims u32 (= 2),
//   then per set: alpha f32, then n_points * 2 coordinates f32 (x, y pairs).
void write_prsd(const std::string& path,
                const std::vector<TrainExample>& examples, uint32_t n_points);
std::vector<TrainExample> read_prsd(const std::string& path);

void write_labels_jsonl(const std::string& path,
                        const std::vector<ExpertLabel>& labels);
std::vector<ExpertLabel> read_labels_jsonl(const std::string& path);

uint32_t crc32_file(const std::string& path);
uint32_t crc32_bytes(const void* data, size_t len, uint32_t seed = 0);

}  // namespace prs
