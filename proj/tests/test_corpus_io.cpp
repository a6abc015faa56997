#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "prs/corpus_io.hpp"
#include "prs/errors.hpp"
#include "prs/rng.hpp"

using namespace prs;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
  fs::create_directories(PRS_TEST_TMP);
  return (fs::path(PRS_TEST_TMP) / name).string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<TrainExample> random_examples(int n_sets, int n_points,
                                          uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainExample> out;
  for (int s = 0; s < n_sets; ++s) {
    TrainExample ex;
    ex.alpha = float(0.5 + 0.5 * rng.uniform());
    for (int i = 0; i < n_points; ++i) {
      ex.points.push_back({rng.normal(), rng.normal()});
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("corpus_io");

TEST_CASE("crc32 matches the reference check value") {
  const char* s = "123456789";
  CHECK(crc32_bytes(s, 9) == 0xCBF43926u);
  CHECK(crc32_bytes("", 0) == 0u);
}

TEST_CASE("prsd write-read-write is byte identical") {
  auto examples = random_examples(17, 25, 4);
  std::string p1 = tmp_path("roundtrip1.prsd");
  std::string p2 = tmp_path("roundtrip2.prsd");
  write_prsd(p1, examples, 25);
  auto loaded = read_prsd(p1);
  REQUIRE(loaded.size() == examples.size());
  write_prsd(p2, loaded, 25);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("empty prsd file is valid") {
  std::string p = tmp_path("empty.prsd");
  write_prsd(p, {}, 10);
  CHECK(read_prsd(p).empty());
}

TEST_CASE("prsd rejects corruption") {
  std::string p = tmp_path("bad.prsd");
  write_prsd(p, random_examples(3, 5, 9), 5);
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');  // clobber the magic
  }
  CHECK_THROWS_AS(read_prsd(p), BadMagic);

  std::string t = tmp_path("trunc.prsd");
  auto bytes = slurp(p);
  std::ofstream out(t, std::ios::binary);
  out.write(bytes.data(), 10);
  out.close();
  CHECK_THROWS_AS(read_prsd(t), BadMagic);

  write_prsd(p, random_examples(3, 5, 9), 5);
  CHECK_THROWS_AS(write_prsd(p, random_examples(2, 4, 1), 5), ShapeMismatch);
}

TEST_CASE("labels jsonl round-trips byte identically") {
  std::vector<ExpertLabel> labels;
  for (int i = 0; i < 6; ++i) {
    ExpertLabel l;
    l.dist_id = "binomial";
    l.alpha = 0.9;
    l.quad = canonicalize({Point2{-1.0 - i, -2}, {3, -2}, {3, 4}, {-1.0 - i, 4}});
    l.coverage_est = 0.905;
    l.n_validation = 100000;
    l.seed = uint64_t(i);
    labels.push_back(l);
  }
  std::string p1 = tmp_path("labels1.jsonl");
  std::string p2 = tmp_path("labels2.jsonl");
  write_labels_jsonl(p1, labels);
  auto loaded = read_labels_jsonl(p1);
  REQUIRE(loaded.size() == labels.size());
  write_labels_jsonl(p2, loaded);
  CHECK(slurp(p1) == slurp(p2));
  for (size_t i = 0; i < labels.size(); ++i) {
    for (int v = 0; v < 4; ++v) {
      CHECK(loaded[i].quad.vertices[size_t(v)].x ==
            labels[i].quad.vertices[size_t(v)].x);
    }
  }
}

TEST_SUITE_END();
