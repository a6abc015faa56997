// Training loop: multi-label min-MSE loss, Adam, warmup + cosine schedule.
#pragma once

#include <string>
#include <vector>

#include "prs/corpus_io.hpp"
#include "prs/labelgen.hpp"
#include "prs/neural/model.hpp"

namespace prs::neural {

struct TrainConfig {
  int batch_size = 64;
  double lr_peak = 3e-4;
  double lr_floor = 1e-5;
  long warmup = 2000;
  long steps = 50000;
  int experts_per_batch = 10;  // J of the min-MSE loss
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 1;
  long checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::string checkpoint_path;
  std::string loss_log_path;
};

// Corpus examples with per-example normalization baked in: points in the
// example's min-max frame, expert targets converted to the same frame and
// canonical vertex order.
struct TrainData {
  struct Example {
    float alpha = 0.0f;
    Mat<float> points;   // n_vis x 2, normalized
    Mat<float> targets;  // pool_size x 8, normalized, canonical order
  };
  std::vector<Example> examples;
  int n_vis = 0;
};

TrainData prepare_train_data(const std::vector<TrainExample>& corpus,
                             const std::vector<ExpertLabel>& labels);

struct StepMetrics {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::vector<long> argmin_hist;  // J buckets
};

class Trainer {
 public:
  Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg, TrainData data);

  StepMetrics step();
  long current_step() const { return step_; }
  Model<float>& model() { return model_; }
  double learning_rate(long step) const;

  // Writes weights to `path` (PRSW) and optimizer/RNG state to path + ".opt"
  // so a resumed run reproduces the original step sequence.
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  void append_loss_log(const StepMetrics& m);

 private:
  Model<float> model_;
  TrainConfig cfg_;
  TrainData data_;
  std::vector<Mat<float>> adam_m_, adam_v_;
  long step_ = 0;
  Rng data_rng_;
  Rng dropout_rng_;
  bool log_header_written_ = false;
};

}  // namespace prs::neural
