#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "dementia/nn/batch.hpp"
#include "dementia/nn/model.hpp"

namespace dementia::models {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

TrainConfig default_mod1d_config();  // lr 1e-3, 200 epochs
TrainConfig default_mod2d_config();  // lr 1e-4, 50 epochs

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;  // NaN when no validation source is given
  double val_acc = 0.0;
};

using ProgressSink = std::function<void(const EpochMetrics&)>;

/// Thrown from a ProgressSink to end training after the current epoch;
/// train() then returns the log so far.
struct StopTraining {};

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t epoch, std::size_t batch);
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// BCE targets: a column of labels for a 1-unit head, one-hot rows for a
/// 2-unit head.
nn::Tensor make_targets(const std::vector<int>& labels, std::size_t output_units);

/// Demented probability per row of a model output.
std::vector<double> scores_from_output(const nn::Tensor& output);

/// Minimizes BCE with Adam. Train loss/accuracy are running means over the
/// epoch's training-mode batches; validation uses inference mode. The batch
/// size is taken from the sources, not from `config`.
std::vector<EpochMetrics> train(nn::Model& model, nn::BatchSource& train_data, nn::BatchSource* validation,
                                const TrainConfig& config, const ProgressSink& progress = {});

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> scores;
  std::vector<int> labels;
};

/// One inference-mode pass over every batch of epoch 0.
EvalResult evaluate(const nn::Model& model, nn::BatchSource& data);

/// Header `epoch,train_loss,train_acc,val_loss,val_acc`.
void write_epoch_log_csv(std::ostream& out, const std::vector<EpochMetrics>& log);

}  // namespace dementia::models
