#include "prs/neural/trainer.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prs/errors.hpp"
#include "prs/neural/weights_io.hpp"

namespace prs::neural {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TrainData prepare_train_data(const std::vector<TrainExample>& corpus,
                             const std::vector<ExpertLabel>& labels) {
  if (corpus.empty()) throw ConfigError("prepare_train_data: empty corpus");
  // Pool labels by confidence level; example alphas are f32 so match loosely.
  std::map<long, std::vector<const ExpertLabel*>> pools;
  auto key_of = [](double alpha) { return std::lround(alpha * 10000.0); };
  for (const auto& l : labels) pools[key_of(l.alpha)].push_back(&l);

  TrainData data;
  data.n_vis = int(corpus[0].points.size());
  data.examples.reserve(corpus.size());
  for (const auto& ex : corpus) {
    if (int(ex.points.size()) != data.n_vis) {
      throw ShapeMismatch("prepare_train_data: uneven visible counts");
    }
    auto it = pools.find(key_of(double(ex.alpha)));
    if (it == pools.end() || it->second.empty()) {
      throw ConfigError("prepare_train_data: no label pool for alpha " +
                        std::to_string(double(ex.alpha)));
    }
    TrainData::Example out;
    out.alpha = ex.alpha;
    SampleSet s;
    s.points = ex.points;
    NormalizationFrame frame = fit_frame(s);
    out.points.resize(data.n_vis, 2);
    for (int i = 0; i < data.n_vis; ++i) {
      Point2 q = normalize(ex.points[size_t(i)], frame);
      out.points(i, 0) = float(q.x);
      out.points(i, 1) = float(q.y);
    }
    out.targets.resize(Eigen::Index(it->second.size()), 8);
    for (size_t j = 0; j < it->second.size(); ++j) {
      ConvexQuad q = normalize(it->second[j]->quad, frame);
      for (int v = 0; v < 4; ++v) {
        out.targets(Eigen::Index(j), 2 * v) = float(q.vertices[size_t(v)].x);
        out.targets(Eigen::Index(j), 2 * v + 1) =
            float(q.vertices[size_t(v)].y);
      }
    }
    data.examples.push_back(std::move(out));
  }
  return data;
}

Trainer::Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg,
                 TrainData data)
    : model_(mcfg),
      cfg_(tcfg),
      data_(std::move(data)),
      data_rng_(tcfg.seed, 0x0DA7A),
      dropout_rng_(tcfg.seed, 0x0D801) {
  if (cfg_.batch_size < 1 || cfg_.steps < 1 || cfg_.warmup < 1 ||
      cfg_.experts_per_batch < 1) {
    throw ConfigError("train config: non-positive field");
  }
  for (const auto& ex : data_.examples) {
    if (ex.targets.rows() < cfg_.experts_per_batch) {
      throw ConfigError("train config: J exceeds label pool size");
    }
  }
  model_.weights().init(mix_seed(tcfg.seed, 0x1417));
  auto tensors = model_.weights().tensors();
  adam_m_.reserve(tensors.size());
  adam_v_.reserve(tensors.size());
  for (const Tensor<float>* t : tensors) {
    adam_m_.push_back(Mat<float>::Zero(t->v.rows(), t->v.cols()));
    adam_v_.push_back(Mat<float>::Zero(t->v.rows(), t->v.cols()));
  }
}

double Trainer::learning_rate(long step) const {
  if (step < cfg_.warmup) {
    return cfg_.lr_peak * double(step + 1) / double(cfg_.warmup);
  }
  long span = cfg_.steps - cfg_.warmup;
  if (span <= 0) return cfg_.lr_floor;
  double progress = std::min(1.0, double(step - cfg_.warmup) / double(span));
  return cfg_.lr_floor +
         0.5 * (cfg_.lr_peak - cfg_.lr_floor) * (1.0 + std::cos(kPi * progress));
}

StepMetrics Trainer::step() {
  const int B = cfg_.batch_size;
  const int J = cfg_.experts_per_batch;
  const int n_vis = data_.n_vis;
  const size_t N = data_.examples.size();

  std::vector<size_t> idx(size_t(B), 0);
  for (int b = 0; b < B; ++b) {
    idx[size_t(b)] = std::min(size_t(data_rng_.uniform() * double(N)), N - 1);
  }

  Mat<float> points(B * n_vis, 2);
  std::vector<float> alphas(size_t(B), 0.0f);
  for (int b = 0; b < B; ++b) {
    const auto& ex = data_.examples[idx[size_t(b)]];
    points.block(b * n_vis, 0, n_vis, 2) = ex.points;
    alphas[size_t(b)] = ex.alpha;
  }

  const Mat<float>& pred = model_.forward(points, alphas, true, &dropout_rng_);

  StepMetrics m;
  m.step = step_;
  m.lr = learning_rate(step_);
  m.argmin_hist.assign(size_t(J), 0);
  Mat<float> dout(B, 8);
  double loss_sum = 0.0;
  for (int b = 0; b < B; ++b) {
    const auto& ex = data_.examples[idx[size_t(b)]];
    Mat<float> experts;
    if (int(ex.targets.rows()) == J) {
      experts = ex.targets;
    } else {
      // Sample J distinct pool rows per batch element.
      std::vector<Eigen::Index> rows(size_t(ex.targets.rows()));
      for (size_t r = 0; r < rows.size(); ++r) rows[r] = Eigen::Index(r);
      for (int j = 0; j < J; ++j) {
        size_t pick = j + std::min(size_t(data_rng_.uniform() *
                                          double(rows.size() - size_t(j))),
                                   rows.size() - size_t(j) - 1);
        std::swap(rows[size_t(j)], rows[pick]);
      }
      experts.resize(J, 8);
      for (int j = 0; j < J; ++j) experts.row(j) = ex.targets.row(rows[size_t(j)]);
    }
    auto [mse, arg] = multi_label_loss<float>(pred.row(b), experts);
    loss_sum += double(mse);
    ++m.argmin_hist[size_t(arg)];
    dout.row(b) =
        (pred.row(b) - experts.row(arg)) * float(2.0 / 8.0 / double(B));
  }
  m.loss = loss_sum / double(B);
  if (!std::isfinite(m.loss)) {
    throw NonFiniteLoss("train step " + std::to_string(step_) +
                        ": non-finite loss");
  }

  model_.weights().zero_grads();
  model_.backward(dout);

  // Adam with bias correction.
  auto tensors = model_.weights().tensors();
  double t = double(step_ + 1);
  float bc1 = float(1.0 / (1.0 - std::pow(cfg_.beta1, t)));
  float bc2 = float(1.0 / (1.0 - std::pow(cfg_.beta2, t)));
  float b1 = float(cfg_.beta1), b2 = float(cfg_.beta2);
  float lr = float(m.lr), eps = float(cfg_.eps);
  for (size_t i = 0; i < tensors.size(); ++i) {
    auto& mm = adam_m_[i];
    auto& vv = adam_v_[i];
    const auto& g = tensors[i]->g;
    mm = b1 * mm + (1.0f - b1) * g;
    vv.array() = b2 * vv.array() + (1.0f - b2) * g.array().square();
    tensors[i]->v.array() -=
        lr * (mm.array() * bc1) / ((vv.array() * bc2).sqrt() + eps);
  }

  ++step_;
  if (cfg_.checkpoint_every > 0 && !cfg_.checkpoint_path.empty() &&
      step_ % cfg_.checkpoint_every == 0) {
    save_checkpoint(cfg_.checkpoint_path);
  }
  return m;
}

void Trainer::save_checkpoint(const std::string& path) const {
  save_weights(model_.weights(), path);
  std::ofstream out(path + ".opt", std::ios::binary);
  if (!out) throw Error("cannot open " + path + ".opt");
  out.write("PRSC", 4);
  uint64_t step = uint64_t(step_);
  out.write(reinterpret_cast<const char*>(&step), 8);
  for (size_t i = 0; i < adam_m_.size(); ++i) {
    out.write(reinterpret_cast<const char*>(adam_m_[i].data()),
              std::streamsize(sizeof(float) * size_t(adam_m_[i].size())));
    out.write(reinterpret_cast<const char*>(adam_v_[i].data()),
              std::streamsize(sizeof(float) * size_t(adam_v_[i].size())));
  }
  std::ostringstream rng_state;
  rng_state << const_cast<Rng&>(data_rng_).engine() << "\n"
            << const_cast<Rng&>(dropout_rng_).engine() << "\n";
  std::string s = rng_state.str();
  uint64_t len = s.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(s.data(), std::streamsize(s.size()));
  if (!out) throw Error("checkpoint write failed: " + path);
}

void Trainer::load_checkpoint(const std::string& path) {
  Weights<float> w = load_weights(path);
  auto src = w.tensors();
  auto dst = model_.weights().tensors();
  if (src.size() != dst.size()) throw ShapeMismatch("checkpoint config differs");
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i]->v.rows() != dst[i]->v.rows() ||
        src[i]->v.cols() != dst[i]->v.cols()) {
      throw ShapeMismatch("checkpoint tensor shape differs");
    }
    dst[i]->v = src[i]->v;
  }
  std::ifstream in(path + ".opt", std::ios::binary);
  if (!in) throw Error("cannot open " + path + ".opt");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "PRSC") throw BadMagic("bad .opt file");
  uint64_t step = 0;
  in.read(reinterpret_cast<char*>(&step), 8);
  step_ = long(step);
  for (size_t i = 0; i < adam_m_.size(); ++i) {
    in.read(reinterpret_cast<char*>(adam_m_[i].data()),
            std::streamsize(sizeof(float) * size_t(adam_m_[i].size())));
    in.read(reinterpret_cast<char*>(adam_v_[i].data()),
            std::streamsize(sizeof(float) * size_t(adam_v_[i].size())));
  }
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  std::string s(len, '\0');
  in.read(s.data(), std::streamsize(len));
  if (!in) throw BadMagic("truncated .opt file");
  std::istringstream rng_state(s);
  rng_state >> data_rng_.engine() >> dropout_rng_.engine();
}

void Trainer::append_loss_log(const StepMetrics& m) {
  if (cfg_.loss_log_path.empty()) return;
  std::ofstream out(cfg_.loss_log_path, std::ios::app);
  if (!log_header_written_ && out.tellp() == 0) {
    out << "step,lr,loss";
    for (size_t j = 0; j < m.argmin_hist.size(); ++j) out << ",argmin_" << j;
    out << "\n";
  }
  log_header_written_ = true;
  out << m.step << "," << m.lr << "," << m.loss;
  for (long h : m.argmin_hist) out << "," << h;
  out << "\n";
}

}  // namespace prs::neural
