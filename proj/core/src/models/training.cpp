#include "dementia/models/training.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "dementia/models/architectures.hpp"
#include "dementia/nn/adam.hpp"
#include "dementia/nn/loss.hpp"

namespace dementia::models {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and non-negative");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

TrainConfig default_mod1d_config() { return {1e-3, 200, 32, 0}; }
TrainConfig default_mod2d_config() { return {1e-4, 50, 32, 0}; }

NonFiniteLoss::NonFiniteLoss(std::size_t epoch, std::size_t batch)
    : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch) {}

nn::Tensor make_targets(const std::vector<int>& labels, std::size_t output_units) {
  if (output_units != 1 && output_units != 2) throw std::invalid_argument("make_targets: head must have 1 or 2 units");
  nn::Tensor t({labels.size(), output_units});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("make_targets: labels must be 0 or 1");
    if (output_units == 1) {
      t[i] = static_cast<float>(labels[i]);
    } else {
      t[i * 2 + static_cast<std::size_t>(labels[i])] = 1.0f;
    }
  }
  return t;
}

std::vector<double> scores_from_output(const nn::Tensor& output) {
  if (output.rank() != 2 || output.extent(1) == 0 || output.extent(1) > 2)
    throw std::invalid_argument("scores_from_output: expected [b, 1] or [b, 2]");
  const std::size_t units = output.extent(1);
  std::vector<double> scores(output.extent(0));
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = output[i * units + units - 1];
  return scores;
}

namespace {

std::size_t count_correct(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) correct += (scores[i] > 0.5 ? 1 : 0) == labels[i];
  return correct;
}

}  // namespace

EvalResult evaluate(const nn::Model& model, nn::BatchSource& data) {
  EvalResult r;
  const std::size_t units = model.output_shape().at(0);
  double loss_sum = 0.0;
  data.begin_epoch(0);
  while (auto batch = data.next()) {
    const nn::Tensor out = model.predict(batch->inputs);
    loss_sum += nn::bce_loss(out, make_targets(batch->labels, units)).loss * static_cast<double>(batch->labels.size());
    const auto scores = scores_from_output(out);
    r.scores.insert(r.scores.end(), scores.begin(), scores.end());
    r.labels.insert(r.labels.end(), batch->labels.begin(), batch->labels.end());
  }
  if (r.labels.empty()) throw std::invalid_argument("evaluate: no samples");
  const double n = static_cast<double>(r.labels.size());
  r.loss = loss_sum / n;
  r.accuracy = static_cast<double>(count_correct(r.scores, r.labels)) / n;
  return r;
}

std::vector<EpochMetrics> train(nn::Model& model, nn::BatchSource& train_data, nn::BatchSource* validation,
                                const TrainConfig& config, const ProgressSink& progress) {
  config.validate();
  const std::size_t units = model.output_shape().at(0);
  auto params = model.parameters();
  nn::Adam<float> adam({.learning_rate = config.learning_rate}, params);
  nn::Rng dropout_rng(nn::mix_seed(config.seed, 0xD50F));

  std::vector<EpochMetrics> log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    train_data.begin_epoch(epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0, batch_index = 0;
    while (auto batch = train_data.next()) {
      const nn::Tensor out = model.forward(batch->inputs, true, dropout_rng);
      const auto loss = nn::bce_loss(out, make_targets(batch->labels, units));
      if (!std::isfinite(loss.loss)) {
        model.release_activations();
        throw NonFiniteLoss(epoch + 1, batch_index);
      }
      model.backward(loss.gradient);
      adam.step(params);

      const std::size_t b = batch->labels.size();
      loss_sum += loss.loss * static_cast<double>(b);
      correct += count_correct(scores_from_output(out), batch->labels);
      seen += b;
      ++batch_index;
    }
    if (seen == 0) throw std::invalid_argument("train: training source produced no samples");

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(seen);
    m.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    m.val_loss = m.val_acc = std::numeric_limits<double>::quiet_NaN();
    if (validation) {
      const EvalResult v = evaluate(model, *validation);
      m.val_loss = v.loss;
      m.val_acc = v.accuracy;
    }
    log.push_back(m);
    if (progress) {
      try {
        progress(m);
      } catch (const StopTraining&) {
        break;
      }
    }
  }
  return log;
}

void write_epoch_log_csv(std::ostream& out, const std::vector<EpochMetrics>& log) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  const auto prev = out.precision(10);
  for (const auto& m : log)
    out << m.epoch << ',' << m.train_loss << ',' << m.train_acc << ',' << m.val_loss << ',' << m.val_acc << '\n';
  out.precision(prev);
}

}  // namespace dementia::models
