#include "prs/neural/weights_io.hpp"

#include <cstring>
#include <fstream>

#include "prs/errors.hpp"

namespace prs::neural {

namespace {

constexpr uint32_t kPrswVersion = 1;

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ofstream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_f32(std::ofstream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw BadMagic("PRSW: truncated file");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

uint16_t get_u16(std::ifstream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw BadMagic("PRSW: truncated file");
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

float get_f32(std::ifstream& in) {
  uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_weights(const Weights<float>& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write("PRSW", 4);
  put_u32(out, kPrswVersion);
  put_u32(out, uint32_t(w.cfg.embed_dim));
  put_u32(out, uint32_t(w.cfg.n_heads));
  put_u32(out, uint32_t(w.cfg.n_layers));
  put_u32(out, uint32_t(w.cfg.ffn_mult));
  put_u32(out, uint32_t(w.cfg.head_hidden));
  put_u32(out, uint32_t(w.cfg.max_points));
  put_f32(out, w.cfg.dropout);

  auto tensors = const_cast<Weights<float>&>(w).tensors();
  put_u32(out, uint32_t(tensors.size()));
  for (const Tensor<float>* t : tensors) {
    put_u16(out, uint16_t(t->name.size()));
    out.write(t->name.data(), std::streamsize(t->name.size()));
    out.put(char(2));  // rank
    put_u32(out, uint32_t(t->v.rows()));
    put_u32(out, uint32_t(t->v.cols()));
    out.write(reinterpret_cast<const char*>(t->v.data()),
              std::streamsize(sizeof(float) * size_t(t->v.size())));
  }
  if (!out) throw Error("write failed: " + path);
}

Weights<float> load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PRSW", 4) != 0) {
    throw BadMagic("PRSW: bad magic in " + path);
  }
  if (get_u32(in) != kPrswVersion) throw BadMagic("PRSW: unsupported version");

  ModelConfig cfg;
  cfg.embed_dim = int(get_u32(in));
  cfg.n_heads = int(get_u32(in));
  cfg.n_layers = int(get_u32(in));
  cfg.ffn_mult = int(get_u32(in));
  cfg.head_hidden = int(get_u32(in));
  cfg.max_points = int(get_u32(in));
  cfg.dropout = get_f32(in);

  Weights<float> w;
  w.build(cfg);
  auto tensors = w.tensors();
  uint32_t count = get_u32(in);
  if (count != tensors.size()) {
    throw ShapeMismatch("PRSW: tensor count does not match config");
  }
  for (Tensor<float>* t : tensors) {
    uint16_t name_len = get_u16(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    int rank = in.get();
    if (!in || rank != 2) throw BadMagic("PRSW: truncated or bad rank");
    uint32_t rows = get_u32(in);
    uint32_t cols = get_u32(in);
    if (name != t->name || rows != uint32_t(t->v.rows()) ||
        cols != uint32_t(t->v.cols())) {
      throw ShapeMismatch("PRSW: tensor " + name + " does not match config");
    }
    in.read(reinterpret_cast<char*>(t->v.data()),
            std::streamsize(sizeof(float) * size_t(t->v.size())));
    if (!in) throw BadMagic("PRSW: truncated tensor data");
  }
  return w;
}

Model<float> load_model(const std::string& path) {
  Weights<float> w = load_weights(path);
  Model<float> model(w.cfg);
  auto src = w.tensors();
  auto dst = model.weights().tensors();
  for (size_t i = 0; i < src.size(); ++i) dst[i]->v = src[i]->v;
  return model;
}

ConvexQuad infer_quad(Model<float>& model, double alpha, const SampleSet& s) {
  NormalizationFrame frame = fit_frame(s);
  int n = int(s.points.size());
  Mat<float> pts(n, 2);
  for (int i = 0; i < n; ++i) {
    Point2 q = normalize(s.points[size_t(i)], frame);
    pts(i, 0) = float(q.x);
    pts(i, 1) = float(q.y);
  }
  Mat<float> out = model.forward_eval(pts, {float(alpha)});
  std::array<Point2, 4> verts;
  for (int v = 0; v < 4; ++v) {
    verts[size_t(v)] = denormalize(
        Point2{double(out(0, 2 * v)), double(out(0, 2 * v + 1))}, frame);
  }
  return canonicalize(verts);  // throws DegenerateQuad on a collapsed hull
}

}  // namespace prs::neural
