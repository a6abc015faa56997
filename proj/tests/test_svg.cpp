#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "prs/errors.hpp"
#include "prs/svg.hpp"

using namespace prs;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
  fs::create_directories(PRS_TEST_TMP);
  return (fs::path(PRS_TEST_TMP) / name).string();
}

int count_occurrences(const std::string& path, const std::string& needle) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  int count = 0;
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_SUITE_BEGIN("svg");

TEST_CASE("overlay emits one polygon and one marker per point") {
  ConvexQuad q = canonicalize({Point2{0, 0}, {4, 0}, {4, 3}, {0, 3}});
  std::vector<Point2> pts;
  for (int i = 0; i < 25; ++i) pts.push_back({0.1 * i, 0.08 * i});
  std::string path = tmp_path("overlay.svg");
  svg_overlay(path, pts, q);
  CHECK(count_occurrences(path, "<polygon") == 1);
  CHECK(count_occurrences(path, "<circle") == 25);
  CHECK(count_occurrences(path, "</svg>") == 1);
}

TEST_CASE("bar chart emits one rect per value") {
  std::string path = tmp_path("bars.svg");
  svg_bar_chart(path, {"a", "b", "c"}, {1.0, 2.0, 0.5}, "title");
  CHECK(count_occurrences(path, "<rect") == 3);
  CHECK(count_occurrences(path, "title") >= 1);
  CHECK_THROWS_AS(svg_bar_chart(path, {"a"}, {1.0, 2.0}, "t"), ConfigError);
}

TEST_CASE("histogram emits one rect per bin") {
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(0.001 * i);
  std::string path = tmp_path("hist.svg");
  svg_histogram(path, values, 16, "hist");
  CHECK(count_occurrences(path, "<rect") == 16);
  CHECK_THROWS_AS(svg_histogram(path, {}, 4, "t"), ConfigError);
}

TEST_SUITE_END();
