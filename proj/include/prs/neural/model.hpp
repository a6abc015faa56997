// Set-input transformer encoder with hand-written reverse-mode gradients.
//
// Pipeline: min-max normalized points and the confidence level are embedded
// by single linear layers, the confidence token is concatenated at position
// 0, the sequence runs through post-norm encoder blocks (no positional
// encoding), and a two-layer MLP maps the confidence token representation
// to 8 reals = 4 normalized vertices.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "prs/errors.hpp"
#include "prs/rng.hpp"

namespace prs::neural {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int embed_dim = 128;
  int n_heads = 4;
  int n_layers = 4;
  int ffn_mult = 4;
  int head_hidden = 128;  // hidden width of the output MLP
  int max_points = 512;
  float dropout = 0.2f;
};

inline void validate(const ModelConfig& c) {
  if (c.embed_dim <= 0 || c.n_heads <= 0 || c.n_layers <= 0 ||
      c.ffn_mult <= 0 || c.head_hidden <= 0 || c.max_points < 2) {
    throw ConfigError("model config: non-positive dimension");
  }
  if (c.embed_dim % c.n_heads != 0) {
    throw ConfigError("model config: embed_dim not divisible by n_heads");
  }
  if (!(c.dropout >= 0.0f && c.dropout < 1.0f)) {
    throw ConfigError("model config: dropout must be in [0, 1)");
  }
}

template <class S>
struct Tensor {
  std::string name;
  Mat<S> v;
  Mat<S> g;

  void resize(Eigen::Index r, Eigen::Index c) {
    v.setZero(r, c);
    g.setZero(r, c);
  }
};

template <class S>
S gelu(S x) {
  const S c = S(0.7978845608028654);  // sqrt(2/pi)
  return S(0.5) * x * (S(1) + std::tanh(c * (x + S(0.044715) * x * x * x)));
}

// Vectorized tanh-approximation GELU over a whole matrix; Eigen's packet
// tanh is an order of magnitude faster than per-element std::tanh.
template <class S>
Mat<S> gelu_mat(const Mat<S>& x) {
  const S c = S(0.7978845608028654);
  auto xa = x.array();
  return (S(0.5) * xa * (S(1) + (c * (xa + S(0.044715) * xa.cube())).tanh()))
      .matrix();
}

template <class S>
Mat<S> gelu_grad_mat(const Mat<S>& x) {
  const S c = S(0.7978845608028654);
  auto xa = x.array();
  auto t = (c * (xa + S(0.044715) * xa.cube())).tanh();
  auto dt = (S(1) - t.square()) * c * (S(1) + S(3) * S(0.044715) * xa.square());
  return (S(0.5) * (S(1) + t) + S(0.5) * xa * dt).matrix();
}

template <class S>
S gelu_grad(S x) {
  const S c = S(0.7978845608028654);
  S x2 = x * x;
  S t = std::tanh(c * (x + S(0.044715) * x2 * x));
  S dt = (S(1) - t * t) * c * (S(1) + S(3) * S(0.044715) * x2);
  return S(0.5) * (S(1) + t) + S(0.5) * x * dt;
}

template <class S>
struct Weights {
  ModelConfig cfg;

  Tensor<S> point_w, point_b;  // 2 x D, 1 x D
  Tensor<S> alpha_w, alpha_b;  // 1 x D, 1 x D
  struct Layer {
    Tensor<S> wq, wk, wv, wo;          // D x D
    Tensor<S> ln1g, ln1b, ln2g, ln2b;  // 1 x D
    Tensor<S> w1, b1;                  // D x H, 1 x H
    Tensor<S> w2, b2;                  // H x D, 1 x D
  };
  std::vector<Layer> layers;
  Tensor<S> head_w1, head_b1;  // D x Hh, 1 x Hh
  Tensor<S> head_w2, head_b2;  // Hh x 8, 1 x 8

  void build(const ModelConfig& c) {
    validate(c);
    cfg = c;
    int d = c.embed_dim;
    int h = c.embed_dim * c.ffn_mult;
    int hh = c.head_hidden;
    point_w.resize(2, d);
    point_b.resize(1, d);
    alpha_w.resize(1, d);
    alpha_b.resize(1, d);
    layers.resize(size_t(c.n_layers));
    for (auto& l : layers) {
      l.wq.resize(d, d);
      l.wk.resize(d, d);
      l.wv.resize(d, d);
      l.wo.resize(d, d);
      l.ln1g.resize(1, d);
      l.ln1b.resize(1, d);
      l.ln2g.resize(1, d);
      l.ln2b.resize(1, d);
      l.w1.resize(d, h);
      l.b1.resize(1, h);
      l.w2.resize(h, d);
      l.b2.resize(1, d);
    }
    head_w1.resize(d, hh);
    head_b1.resize(1, hh);
    head_w2.resize(hh, 8);
    head_b2.resize(1, 8);
    name_tensors();
  }

  // Fixed, documented order; the weight file writes tensors in this order.
  std::vector<Tensor<S>*> tensors() {
    std::vector<Tensor<S>*> out = {&point_w, &point_b, &alpha_w, &alpha_b};
    for (auto& l : layers) {
      for (Tensor<S>* t : {&l.wq, &l.wk, &l.wv, &l.wo, &l.ln1g, &l.ln1b,
                           &l.w1, &l.b1, &l.w2, &l.b2, &l.ln2g, &l.ln2b}) {
        out.push_back(t);
      }
    }
    for (Tensor<S>* t : {&head_w1, &head_b1, &head_w2, &head_b2}) {
      out.push_back(t);
    }
    return out;
  }

  void init(uint64_t seed) {
    Rng rng(seed);
    for (Tensor<S>* t : tensors()) {
      bool is_bias = t->v.rows() == 1 && t->name.find(".b") != std::string::npos;
      bool is_gamma = t->name.find("gamma") != std::string::npos;
      bool is_beta = t->name.find("beta") != std::string::npos;
      if (is_gamma) {
        t->v.setOnes();
      } else if (is_bias || is_beta) {
        t->v.setZero();
      } else {
        for (Eigen::Index i = 0; i < t->v.rows(); ++i) {
          for (Eigen::Index j = 0; j < t->v.cols(); ++j) {
            t->v(i, j) = S(rng.normal() * 0.02);
          }
        }
      }
    }
  }

  void zero_grads() {
    for (Tensor<S>* t : tensors()) t->g.setZero();
  }

 private:
  void name_tensors() {
    point_w.name = "point_embed.w";
    point_b.name = "point_embed.b";
    alpha_w.name = "alpha_embed.w";
    alpha_b.name = "alpha_embed.b";
    for (size_t i = 0; i < layers.size(); ++i) {
      std::string p = "layers." + std::to_string(i) + ".";
      layers[i].wq.name = p + "attn.wq";
      layers[i].wk.name = p + "attn.wk";
      layers[i].wv.name = p + "attn.wv";
      layers[i].wo.name = p + "attn.wo";
      layers[i].ln1g.name = p + "ln1.gamma";
      layers[i].ln1b.name = p + "ln1.beta";
      layers[i].w1.name = p + "ffn.w1";
      layers[i].b1.name = p + "ffn.b1";
      layers[i].w2.name = p + "ffn.w2";
      layers[i].b2.name = p + "ffn.b2";
      layers[i].ln2g.name = p + "ln2.gamma";
      layers[i].ln2b.name = p + "ln2.beta";
    }
    head_w1.name = "head.w1";
    head_b1.name = "head.b1";
    head_w2.name = "head.w2";
    head_b2.name = "head.b2";
  }
};

// Activations kept for the backward pass.
template <class S>
struct Cache {
  int B = 0, T = 0;
  Mat<S> points;          // (B*(T-1)) x 2
  std::vector<S> alphas;
  struct LayerCache {
    Mat<S> x_in;                 // (B*T) x D
    Mat<S> q, k, v;              // (B*T) x D
    std::vector<Mat<S>> probs;   // B*H entries, T x T softmax rows
    Mat<S> attn_concat;          // (B*T) x D, pre-output-projection
    Mat<S> mask1, mask2;         // dropout masks (empty in eval mode)
    Mat<S> r1;                   // residual sum before ln1
    Mat<S> xhat1;                // normalized r1
    std::vector<S> rstd1;
    Mat<S> y;                    // ln1 output
    Mat<S> h_pre, h_act;         // FFN hidden
    Mat<S> r2;
    Mat<S> xhat2;
    std::vector<S> rstd2;
    Mat<S> x_out;
  };
  std::vector<LayerCache> layers;
  Mat<S> z;        // B x D, confidence-token representations
  Mat<S> h1_pre;   // B x Hh
  Mat<S> h1_act;
  Mat<S> out;      // B x 8
};

template <class S>
class Model {
 public:
  explicit Model(const ModelConfig& cfg) { w_.build(cfg); }

  Weights<S>& weights() { return w_; }
  const Weights<S>& weights() const { return w_; }
  const ModelConfig& config() const { return w_.cfg; }
  const Cache<S>& cache() const { return cache_; }

  // points: (B * n_points) x 2 in normalized space, n_points identical for
  // every example in the batch. Returns B x 8.
  const Mat<S>& forward(const Mat<S>& points, const std::vector<S>& alphas,
                        bool train = false, Rng* dropout_rng = nullptr) {
    const ModelConfig& cfg = w_.cfg;
    int B = int(alphas.size());
    if (B == 0 || points.rows() % B != 0) {
      throw ShapeMismatch("forward: points rows not a multiple of batch");
    }
    int n_points = int(points.rows()) / B;
    if (points.cols() != 2 || n_points < 2 || n_points > cfg.max_points) {
      throw ShapeMismatch("forward: bad point count");
    }
    int T = n_points + 1;
    int D = cfg.embed_dim;
    int H = cfg.n_heads;
    int dh = D / H;
    S scale = S(1) / std::sqrt(S(dh));
    bool use_dropout = train && cfg.dropout > 0.0f;
    if (use_dropout && dropout_rng == nullptr) {
      throw ConfigError("forward: dropout needs an RNG in train mode");
    }

    cache_.B = B;
    cache_.T = T;
    cache_.points = points;
    cache_.alphas = alphas;
    cache_.layers.assign(size_t(cfg.n_layers), {});

    // Embedding + confidence token at position 0 of each example.
    Mat<S> x(B * T, D);
    for (int b = 0; b < B; ++b) {
      x.row(b * T) = alphas[size_t(b)] * w_.alpha_w.v.row(0) + w_.alpha_b.v.row(0);
      x.block(b * T + 1, 0, n_points, D).noalias() =
          points.block(b * n_points, 0, n_points, 2) * w_.point_w.v;
      x.block(b * T + 1, 0, n_points, D).rowwise() += w_.point_b.v.row(0);
    }

    for (int li = 0; li < cfg.n_layers; ++li) {
      auto& L = w_.layers[size_t(li)];
      auto& c = cache_.layers[size_t(li)];
      c.x_in = x;
      c.q.noalias() = x * L.wq.v;
      c.k.noalias() = x * L.wk.v;
      c.v.noalias() = x * L.wv.v;
      c.probs.assign(size_t(B) * H, Mat<S>());
      c.attn_concat.setZero(B * T, D);
      for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
          auto qb = c.q.block(b * T, h * dh, T, dh);
          auto kb = c.k.block(b * T, h * dh, T, dh);
          auto vb = c.v.block(b * T, h * dh, T, dh);
          Mat<S> s = (qb * kb.transpose()) * scale;
          // Row-wise softmax with max subtraction.
          for (int r = 0; r < T; ++r) {
            S m = s.row(r).maxCoeff();
            s.row(r) = (s.row(r).array() - m).exp();
            s.row(r) /= s.row(r).sum();
          }
          c.attn_concat.block(b * T, h * dh, T, dh).noalias() = s * vb;
          c.probs[size_t(b) * H + h] = std::move(s);
        }
      }
      Mat<S> a = c.attn_concat * L.wo.v;
      if (use_dropout) {
        c.mask1 = dropout_mask(B * T, D, dropout_rng);
        a.array() *= c.mask1.array();
      }
      c.r1 = x + a;
      layer_norm(c.r1, L.ln1g.v, L.ln1b.v, c.xhat1, c.rstd1, c.y);

      c.h_pre.noalias() = c.y * L.w1.v;
      c.h_pre.rowwise() += L.b1.v.row(0);
      c.h_act = gelu_mat(c.h_pre);
      Mat<S> f = c.h_act * L.w2.v;
      f.rowwise() += L.b2.v.row(0);
      if (use_dropout) {
        c.mask2 = dropout_mask(B * T, D, dropout_rng);
        f.array() *= c.mask2.array();
      }
      c.r2 = c.y + f;
      layer_norm(c.r2, L.ln2g.v, L.ln2b.v, c.xhat2, c.rstd2, c.x_out);
      x = c.x_out;
    }

    cache_.z.resize(B, D);
    for (int b = 0; b < B; ++b) cache_.z.row(b) = x.row(b * T);
    cache_.h1_pre.noalias() = cache_.z * w_.head_w1.v;
    cache_.h1_pre.rowwise() += w_.head_b1.v.row(0);
    cache_.h1_act = gelu_mat(cache_.h1_pre);
    cache_.out.noalias() = cache_.h1_act * w_.head_w2.v;
    cache_.out.rowwise() += w_.head_b2.v.row(0);
    return cache_.out;
  }

  // Inference-only forward: no dropout, no activation cache, matrix-level
  // softmax, and the final layer evaluates just the confidence token (the
  // only row the head reads). Same math as forward() up to float reduction
  // order.
  Mat<S> forward_eval(const Mat<S>& points, const std::vector<S>& alphas) {
    const ModelConfig& cfg = w_.cfg;
    int B = int(alphas.size());
    if (B == 0 || points.rows() % B != 0) {
      throw ShapeMismatch("forward: points rows not a multiple of batch");
    }
    int n_points = int(points.rows()) / B;
    if (points.cols() != 2 || n_points < 2 || n_points > cfg.max_points) {
      throw ShapeMismatch("forward: bad point count");
    }
    int T = n_points + 1;
    int D = cfg.embed_dim;
    int H = cfg.n_heads;
    int dh = D / H;
    S scale = S(1) / std::sqrt(S(dh));

    Mat<S> x(B * T, D);
    for (int b = 0; b < B; ++b) {
      x.row(b * T) = alphas[size_t(b)] * w_.alpha_w.v.row(0) + w_.alpha_b.v.row(0);
      x.block(b * T + 1, 0, n_points, D).noalias() =
          points.block(b * n_points, 0, n_points, 2) * w_.point_w.v;
      x.block(b * T + 1, 0, n_points, D).rowwise() += w_.point_b.v.row(0);
    }

    Mat<S> q, k, v, attn(B * T, D), s, y, h, f, r;
    Mat<S> z(B, D);
    for (int li = 0; li < cfg.n_layers; ++li) {
      auto& L = w_.layers[size_t(li)];
      bool last = li + 1 == cfg.n_layers;
      k.noalias() = x * L.wk.v;
      v.noalias() = x * L.wv.v;
      if (last) {
        // Only the confidence-token rows are needed downstream.
        Mat<S> a0(B, D);
        for (int b = 0; b < B; ++b) {
          Mat<S> q0 = x.row(b * T) * L.wq.v;
          for (int hh = 0; hh < H; ++hh) {
            auto kb = k.block(b * T, hh * dh, T, dh);
            auto vb = v.block(b * T, hh * dh, T, dh);
            Mat<S> sr = (q0.block(0, hh * dh, 1, dh) * kb.transpose()) * scale;
            S m = sr.row(0).maxCoeff();
            sr = (sr.array() - m).exp().matrix();
            sr /= sr.sum();
            a0.block(b, hh * dh, 1, dh).noalias() = sr * vb;
          }
        }
        Mat<S> r1 = a0 * L.wo.v;
        for (int b = 0; b < B; ++b) r1.row(b) += x.row(b * T);
        Mat<S> y0 = layer_norm_rows(r1, L.ln1g.v, L.ln1b.v);
        Mat<S> h0 = (y0 * L.w1.v).rowwise() + L.b1.v.row(0);
        h0 = gelu_mat(h0);
        Mat<S> f0 = (h0 * L.w2.v).rowwise() + L.b2.v.row(0);
        f0 += y0;
        z = layer_norm_rows(f0, L.ln2g.v, L.ln2b.v);
        break;
      }
      q.noalias() = x * L.wq.v;
      for (int b = 0; b < B; ++b) {
        for (int hh = 0; hh < H; ++hh) {
          auto qb = q.block(b * T, hh * dh, T, dh);
          auto kb = k.block(b * T, hh * dh, T, dh);
          auto vb = v.block(b * T, hh * dh, T, dh);
          s.noalias() = (qb * kb.transpose()) * scale;
          for (int rr = 0; rr < T; ++rr) {
            s.row(rr).array() -= s.row(rr).maxCoeff();
          }
          s = s.array().exp().matrix();  // vectorized across the matrix
          for (int rr = 0; rr < T; ++rr) s.row(rr) /= s.row(rr).sum();
          attn.block(b * T, hh * dh, T, dh).noalias() = s * vb;
        }
      }
      r.noalias() = attn * L.wo.v;
      r += x;
      y = layer_norm_rows(r, L.ln1g.v, L.ln1b.v);
      h.noalias() = y * L.w1.v;
      h.rowwise() += L.b1.v.row(0);
      h = gelu_mat(h);
      f.noalias() = h * L.w2.v;
      f.rowwise() += L.b2.v.row(0);
      f += y;
      x = layer_norm_rows(f, L.ln2g.v, L.ln2b.v);
    }

    Mat<S> h1 = (z * w_.head_w1.v).rowwise() + w_.head_b1.v.row(0);
    h1 = gelu_mat(h1);
    Mat<S> out = (h1 * w_.head_w2.v).rowwise() + w_.head_b2.v.row(0);
    return out;
  }

  // Accumulates parameter gradients for the most recent forward call.
  void backward(const Mat<S>& dout) {
    const ModelConfig& cfg = w_.cfg;
    int B = cache_.B, T = cache_.T;
    int D = cfg.embed_dim;
    int H = cfg.n_heads;
    int dh = D / H;
    int n_points = T - 1;
    S scale = S(1) / std::sqrt(S(dh));
    if (dout.rows() != B || dout.cols() != 8) {
      throw ShapeMismatch("backward: dout must be B x 8");
    }

    // Output head.
    w_.head_w2.g.noalias() += cache_.h1_act.transpose() * dout;
    w_.head_b2.g.row(0) += dout.colwise().sum();
    Mat<S> dh1 = dout * w_.head_w2.v.transpose();
    dh1.array() *=
        gelu_grad_mat(cache_.h1_pre).array();
    w_.head_w1.g.noalias() += cache_.z.transpose() * dh1;
    w_.head_b1.g.row(0) += dh1.colwise().sum();
    Mat<S> dz = dh1 * w_.head_w1.v.transpose();

    Mat<S> dx;
    dx.setZero(B * T, D);
    for (int b = 0; b < B; ++b) dx.row(b * T) = dz.row(b);

    for (int li = cfg.n_layers - 1; li >= 0; --li) {
      auto& L = w_.layers[size_t(li)];
      auto& c = cache_.layers[size_t(li)];

      Mat<S> dr2 = layer_norm_backward(dx, c.xhat2, c.rstd2, L.ln2g, L.ln2b);
      Mat<S> df = dr2;
      if (c.mask2.size() > 0) df.array() *= c.mask2.array();
      Mat<S> dy = dr2;  // residual branch

      L.w2.g.noalias() += c.h_act.transpose() * df;
      L.b2.g.row(0) += df.colwise().sum();
      Mat<S> dhh = df * L.w2.v.transpose();
      dhh.array() *=
          gelu_grad_mat(c.h_pre).array();
      L.w1.g.noalias() += c.y.transpose() * dhh;
      L.b1.g.row(0) += dhh.colwise().sum();
      dy.noalias() += dhh * L.w1.v.transpose();

      Mat<S> dr1 = layer_norm_backward(dy, c.xhat1, c.rstd1, L.ln1g, L.ln1b);
      Mat<S> da = dr1;
      if (c.mask1.size() > 0) da.array() *= c.mask1.array();
      Mat<S> dx_in = dr1;  // residual branch

      L.wo.g.noalias() += c.attn_concat.transpose() * da;
      Mat<S> dconcat = da * L.wo.v.transpose();

      Mat<S> dq(B * T, D), dk(B * T, D), dv(B * T, D);
      dq.setZero();
      dk.setZero();
      dv.setZero();
      for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
          const Mat<S>& p = c.probs[size_t(b) * H + h];
          auto dob = dconcat.block(b * T, h * dh, T, dh);
          auto qb = c.q.block(b * T, h * dh, T, dh);
          auto kb = c.k.block(b * T, h * dh, T, dh);
          auto vb = c.v.block(b * T, h * dh, T, dh);
          Mat<S> dp = dob * vb.transpose();
          dv.block(b * T, h * dh, T, dh).noalias() = p.transpose() * dob;
          Mat<S> ds(T, T);
          for (int r = 0; r < T; ++r) {
            S dot = dp.row(r).dot(p.row(r));
            ds.row(r) = p.row(r).array() * (dp.row(r).array() - dot);
          }
          dq.block(b * T, h * dh, T, dh).noalias() = ds * kb * scale;
          dk.block(b * T, h * dh, T, dh).noalias() =
              ds.transpose() * qb * scale;
        }
      }
      L.wq.g.noalias() += c.x_in.transpose() * dq;
      L.wk.g.noalias() += c.x_in.transpose() * dk;
      L.wv.g.noalias() += c.x_in.transpose() * dv;
      dx_in.noalias() += dq * L.wq.v.transpose();
      dx_in.noalias() += dk * L.wk.v.transpose();
      dx_in.noalias() += dv * L.wv.v.transpose();
      dx = std::move(dx_in);
    }

    // Embeddings.
    for (int b = 0; b < B; ++b) {
      w_.alpha_w.g.row(0) += cache_.alphas[size_t(b)] * dx.row(b * T);
      w_.alpha_b.g.row(0) += dx.row(b * T);
      auto dpts = dx.block(b * T + 1, 0, n_points, D);
      w_.point_w.g.noalias() +=
          cache_.points.block(b * n_points, 0, n_points, 2).transpose() * dpts;
      w_.point_b.g.row(0) += dpts.colwise().sum();
    }
  }

 private:
  static constexpr double kLnEps = 1e-5;

  static Mat<S> layer_norm_rows(const Mat<S>& x, const Mat<S>& gamma,
                                const Mat<S>& beta) {
    Eigen::Index n = x.cols();
    Mat<S> y(x.rows(), n);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      S mean = x.row(r).mean();
      S var = (x.row(r).array() - mean).square().sum() / S(n);
      S rs = S(1) / std::sqrt(var + S(kLnEps));
      y.row(r) = ((x.row(r).array() - mean) * rs) * gamma.row(0).array() +
                 beta.row(0).array();
    }
    return y;
  }

  Mat<S> dropout_mask(int rows, int cols, Rng* rng) {
    float p = w_.cfg.dropout;
    S keep = S(1) / S(1.0f - p);
    Mat<S> m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        m(i, j) = rng->uniform() >= p ? keep : S(0);
      }
    }
    return m;
  }

  static void layer_norm(const Mat<S>& x, const Mat<S>& gamma,
                         const Mat<S>& beta, Mat<S>& xhat,
                         std::vector<S>& rstd, Mat<S>& y) {
    Eigen::Index n = x.cols();
    xhat.resize(x.rows(), n);
    y.resize(x.rows(), n);
    rstd.assign(size_t(x.rows()), S(0));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      S mean = x.row(r).mean();
      S var = (x.row(r).array() - mean).square().sum() / S(n);
      S rs = S(1) / std::sqrt(var + S(kLnEps));
      rstd[size_t(r)] = rs;
      xhat.row(r) = (x.row(r).array() - mean) * rs;
      y.row(r) = xhat.row(r).array() * gamma.row(0).array() +
                 beta.row(0).array();
    }
  }

  static Mat<S> layer_norm_backward(const Mat<S>& dy, const Mat<S>& xhat,
                                    const std::vector<S>& rstd,
                                    Tensor<S>& gamma_t, Tensor<S>& beta_t) {
    Eigen::Index n = dy.cols();
    Mat<S> dx(dy.rows(), n);
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      auto dyr = dy.row(r).array();
      auto xr = xhat.row(r).array();
      Mat<S> dxhat = (dyr * gamma_t.v.row(0).array()).matrix();
      S m1 = dxhat.row(0).mean();
      S m2 = (dxhat.row(0).array() * xr).mean();
      dx.row(r) =
          rstd[size_t(r)] * (dxhat.row(0).array() - m1 - xr * m2);
      gamma_t.g.row(0).array() += dyr * xr;
      beta_t.g.row(0).array() += dyr;
    }
    return dx;
  }

  Weights<S> w_;
  Cache<S> cache_;
};

// Per-expert MSE over the 8 output scalars; returns (min, argmin).
template <class S>
std::pair<S, int> multi_label_loss(const Eigen::Ref<const Mat<S>>& pred_row,
                                   const Mat<S>& experts) {
  if (experts.rows() < 1 || experts.cols() != 8 || pred_row.cols() != 8) {
    throw ShapeMismatch("multi_label_loss: need J x 8 experts and 1 x 8 pred");
  }
  Mat<S> p = pred_row;  // contiguous copy: reduction order independent of
                        // the caller's expression layout
  S best = S(0);
  int arg = 0;
  for (Eigen::Index j = 0; j < experts.rows(); ++j) {
    S mse = (p.row(0) - experts.row(j)).array().square().mean();
    if (j == 0 || mse < best) {
      best = mse;
      arg = int(j);
    }
  }
  return {best, arg};
}

}  // namespace prs::neural
