#include "prs/corpus_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "prs/errors.hpp"

#include "json.hpp"

namespace prs {

namespace {

constexpr uint32_t kPrsdVersion = 1;

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ofstream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw BadMagic("PRSD: truncated file");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

float get_f32(std::ifstream& in) {
  uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

const std::array<uint32_t, 256>& crc_table() {
  static const std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace

uint32_t crc32_bytes(const void* data, size_t len, uint32_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint32_t c = seed ^ 0xffffffffu;
  for (size_t i = 0; i < len; ++i) {
    c = crc_table()[(c ^ p[i]) & 0xff] ^ (c >> 8);
  }
  return c ^ 0xffffffffu;
}

uint32_t crc32_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  uint32_t crc = 0;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    if (got > 0) crc = crc32_bytes(buf, size_t(got), crc);
  }
  return crc;
}

void write_prsd(const std::string& path,
                const std::vector<TrainExample>& examples, uint32_t n_points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write("PRSD", 4);
  put_u32(out, kPrsdVersion);
  put_u32(out, uint32_t(examples.size()));
  put_u32(out, n_points);
  put_u32(out, 2);
  for (const auto& ex : examples) {
    if (ex.points.size() != n_points) {
      throw ShapeMismatch("PRSD: example point count differs from header");
    }
    put_f32(out, ex.alpha);
    for (const auto& p : ex.points) {
      put_f32(out, float(p.x));
      put_f32(out, float(p.y));
    }
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<TrainExample> read_prsd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PRSD", 4) != 0) {
    throw BadMagic("PRSD: bad magic in " + path);
  }
  uint32_t version = get_u32(in);
  if (version != kPrsdVersion) throw BadMagic("PRSD: unsupported version");
  uint32_t n_sets = get_u32(in);
  uint32_t n_points = get_u32(in);
  uint32_t dims = get_u32(in);
  if (dims != 2) throw ShapeMismatch("PRSD: dims != 2");
  std::vector<TrainExample> out;
  out.reserve(n_sets);
  for (uint32_t s = 0; s < n_sets; ++s) {
    TrainExample ex;
    ex.alpha = get_f32(in);
    ex.points.resize(n_points);
    for (uint32_t i = 0; i < n_points; ++i) {
      ex.points[i].x = get_f32(in);
      ex.points[i].y = get_f32(in);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void write_labels_jsonl(const std::string& path,
                        const std::vector<ExpertLabel>& labels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (const auto& l : labels) {
    nlohmann::json j;
    j["dist_id"] = l.dist_id;
    j["alpha"] = l.alpha;
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : l.quad.vertices) verts.push_back({v.x, v.y});
    j["vertices"] = verts;
    j["coverage_est"] = l.coverage_est;
    j["n_validation"] = l.n_validation;
    j["seed"] = l.seed;
    out << j.dump() << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

std::vector<ExpertLabel> read_labels_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<ExpertLabel> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ExpertLabel l;
    l.dist_id = j.at("dist_id").get<std::string>();
    l.alpha = j.at("alpha").get<double>();
    std::array<Point2, 4> v;
    for (int i = 0; i < 4; ++i) {
      v[i] = {j.at("vertices")[i][0].get<double>(),
              j.at("vertices")[i][1].get<double>()};
    }
    l.quad = canonicalize(v);
    l.coverage_est = j.at("coverage_est").get<double>();
    l.n_validation = j.at("n_validation").get<long>();
    l.seed = j.at("seed").get<uint64_t>();
    out.push_back(l);
  }
  return out;
}

}  // namespace prs
