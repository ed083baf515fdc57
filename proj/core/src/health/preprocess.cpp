#include "dementia/health/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dementia::health {

std::vector<LabeledVector> to_labeled_vectors(const std::vector<HealthRecord>& records) {
  std::vector<LabeledVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.dementia) throw FieldError("dementia", "label required for training data");
    out.push_back({categorize(r).values(), *r.dementia});
  }
  return out;
}

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

std::vector<LabeledVector> smote_oversample(std::span<const LabeledVector> samples, std::size_t k, nn::Rng& rng) {
  std::size_t counts[2] = {0, 0};
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("smote: labels must be 0 or 1");
    ++counts[s.label];
  }
  if (counts[0] == 0 || counts[1] == 0) throw std::invalid_argument("smote: both classes must be present");

  std::vector<LabeledVector> out(samples.begin(), samples.end());
  if (counts[0] == counts[1]) return out;
  const int minority = counts[0] < counts[1] ? 0 : 1;
  const std::size_t deficit = counts[1 - minority] - counts[minority];

  std::vector<const LabeledVector*> pool;
  for (const auto& s : samples)
    if (s.label == minority) pool.push_back(&s);
  if (pool.size() < 2) throw std::invalid_argument("smote: minority class needs at least 2 samples");
  k = std::clamp<std::size_t>(k, 1, pool.size() - 1);

  // k nearest minority neighbours of each minority sample; index breaks ties.
  std::vector<std::vector<std::size_t>> neighbours(pool.size());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    idx.resize(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
    std::vector<double> d(pool.size());
    for (std::size_t j = 0; j < pool.size(); ++j) d[j] = squared_distance(pool[i]->features, pool[j]->features);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
    neighbours[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  }

  out.reserve(out.size() + deficit);
  for (std::size_t n = 0; n < deficit; ++n) {
    const std::size_t base = rng.below(pool.size());
    const std::size_t other = neighbours[base][rng.below(k)];
    const double u = rng.uniform();
    LabeledVector synthetic{{}, minority};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double x = pool[base]->features[f];
      synthetic.features[f] = x + u * (pool[other]->features[f] - x);
    }
    out.push_back(synthetic);
  }
  return out;
}

FeatureVector ScalerParams::transform(const FeatureVector& x) const noexcept {
  FeatureVector z;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z[i] = (x[i] - mean[i]) / scale[i];
  return z;
}

FeatureVector ScalerParams::inverse_transform(const FeatureVector& z) const noexcept {
  FeatureVector x;
  for (std::size_t i = 0; i < kFeatureCount; ++i) x[i] = z[i] * scale[i] + mean[i];
  return x;
}

std::vector<LabeledVector> ScalerParams::transform(std::span<const LabeledVector> samples) const {
  std::vector<LabeledVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({transform(s.features), s.label});
  return out;
}

ScalerParams fit_scaler(std::span<const LabeledVector> train) {
  if (train.empty()) throw std::invalid_argument("fit_scaler: empty training set");
  ScalerParams p;
  const double n = static_cast<double>(train.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const auto& s : train) sum += s.features[f];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& s : train) sq += (s.features[f] - mean) * (s.features[f] - mean);
    const double sd = std::sqrt(sq / n);
    p.mean[f] = mean;
    p.scale[f] = sd > 0.0 ? sd : 1.0;
  }
  return p;
}

SplitSizes split_sizes(std::size_t n) {
  SplitSizes s;
  s.test = (n + 4) / 5;
  const std::size_t rest = n - s.test;
  s.validation = (rest + 4) / 5;
  s.train = rest - s.validation;
  return s;
}

nn::Tensor to_input_tensor(std::span<const FeatureVector> rows) {
  nn::Tensor t({rows.size(), kFeatureCount, 1});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t f = 0; f < kFeatureCount; ++f) t[r * kFeatureCount + f] = static_cast<float>(rows[r][f]);
  return t;
}

HealthBatcher::HealthBatcher(std::vector<LabeledVector> samples, std::size_t batch_size, std::uint64_t seed,
                             bool shuffle)
    : samples_(std::move(samples)), batch_size_(batch_size), seed_(seed), shuffle_(shuffle) {
  if (samples_.empty()) throw std::invalid_argument("batcher: empty sample set");
  if (batch_size_ == 0) throw std::invalid_argument("batcher: batch size must be positive");
  begin_epoch(0);
}

void HealthBatcher::begin_epoch(std::uint64_t epoch) {
  order_.resize(samples_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (shuffle_) {
    nn::Rng rng(nn::mix_seed(seed_, epoch));
    rng.shuffle(order_.begin(), order_.end());
  }
  cursor_ = 0;
}

std::optional<nn::Batch> HealthBatcher::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(cursor_ + batch_size_, order_.size());
  std::vector<FeatureVector> rows;
  nn::Batch batch;
  for (std::size_t i = cursor_; i < end; ++i) {
    rows.push_back(samples_[order_[i]].features);
    batch.labels.push_back(samples_[order_[i]].label);
  }
  batch.inputs = to_input_tensor(rows);
  cursor_ = end;
  return batch;
}

PreparedHealthData prepare_health_data(const std::vector<HealthRecord>& records, std::uint64_t seed,
                                       std::size_t smote_k) {
  PreparedHealthData out;
  auto split = split_dataset(to_labeled_vectors(records), seed);
  nn::Rng smote_rng(nn::mix_seed(seed, 0x5307E));
  const std::size_t before = split.train.size();
  auto balanced = smote_oversample(split.train, smote_k, smote_rng);
  out.synthetic_added = balanced.size() - before;
  out.scaler = fit_scaler(balanced);
  out.sets.split_seed = seed;
  out.sets.train = out.scaler.transform(balanced);
  out.sets.validation = out.scaler.transform(split.validation);
  out.sets.test = out.scaler.transform(split.test);
  return out;
}

}  // namespace dementia::health
