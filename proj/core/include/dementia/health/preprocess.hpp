#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dementia/health/record.hpp"
#include "dementia/nn/batch.hpp"
#include "dementia/nn/rng.hpp"

namespace dementia::health {

struct LabeledVector {
  FeatureVector features{};
  int label = 0;

  bool operator==(const LabeledVector&) const = default;
};

/// Categorizes labeled records; unlabeled records are rejected.
std::vector<LabeledVector> to_labeled_vectors(const std::vector<HealthRecord>& records);

inline constexpr std::size_t kDefaultSmoteNeighbors = 5;

/// SMOTE: appends synthetic minority samples x + u * (neighbor - x), with
/// u ~ U[0, 1] and the neighbor drawn from x's k nearest minority samples
/// (Euclidean), until both classes have the majority count. Original samples
/// are returned first, unchanged. k is clamped to minority_count - 1.
/// Throws std::invalid_argument for single-class input or a minority of < 2.
std::vector<LabeledVector> smote_oversample(std::span<const LabeledVector> samples,
                                            std::size_t k, nn::Rng& rng);

/// Per-feature standardization fitted on a training set only.
struct ScalerParams {
  FeatureVector mean{};
  FeatureVector scale{};  // population standard deviation; 0 replaced by 1

  FeatureVector transform(const FeatureVector& x) const noexcept;
  FeatureVector inverse_transform(const FeatureVector& z) const noexcept;
  std::vector<LabeledVector> transform(std::span<const LabeledVector> samples) const;

  bool operator==(const ScalerParams&) const = default;
};

/// Throws std::invalid_argument when `train` is empty.
ScalerParams fit_scaler(std::span<const LabeledVector> train);

template <typename Item>
struct SplitDataset {
  std::vector<Item> train;
  std::vector<Item> validation;
  std::vector<Item> test;
  std::uint64_t split_seed = 0;
};

struct SplitSizes {
  std::size_t train = 0, validation = 0, test = 0;
};

/// test = ceil(n / 5); validation = ceil(remaining / 5); train = the rest.
SplitSizes split_sizes(std::size_t n);

/// Seeded shuffle, then test / validation / train carved off in that order.
/// Throws std::invalid_argument for fewer than 10 items.
template <typename Item>
SplitDataset<Item> split_dataset(std::vector<Item> items, std::uint64_t seed) {
  if (items.size() < 10) throw std::invalid_argument("split needs at least 10 records");
  nn::Rng rng(seed);
  rng.shuffle(items.begin(), items.end());
  const SplitSizes sizes = split_sizes(items.size());
  SplitDataset<Item> out;
  out.split_seed = seed;
  auto it = items.begin();
  out.test.assign(std::make_move_iterator(it), std::make_move_iterator(it + sizes.test));
  it += static_cast<std::ptrdiff_t>(sizes.test);
  out.validation.assign(std::make_move_iterator(it), std::make_move_iterator(it + sizes.validation));
  it += static_cast<std::ptrdiff_t>(sizes.validation);
  out.train.assign(std::make_move_iterator(it), std::make_move_iterator(items.end()));
  return out;
}

/// Converts one feature vector to the model's [6, 1] layout.
nn::Tensor to_input_tensor(std::span<const FeatureVector> rows);

/// Mini-batches of [b, 6, 1] health vectors. With shuffling on, epoch e uses
/// the order drawn from mix_seed(seed, e); the final partial batch is kept.
class HealthBatcher final : public nn::BatchSource {
 public:
  HealthBatcher(std::vector<LabeledVector> samples, std::size_t batch_size, std::uint64_t seed,
                bool shuffle = true);

  void begin_epoch(std::uint64_t epoch) override;
  std::optional<nn::Batch> next() override;
  std::size_t sample_count() const override { return samples_.size(); }
  const std::vector<std::size_t>& order() const noexcept { return order_; }

 private:
  std::vector<LabeledVector> samples_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// The whole MOD-1D training preparation: categorize, split, SMOTE the
/// training partition, fit the scaler on it, scale all partitions.
struct PreparedHealthData {
  SplitDataset<LabeledVector> sets;  // scaled
  ScalerParams scaler;
  std::size_t synthetic_added = 0;
};

PreparedHealthData prepare_health_data(const std::vector<HealthRecord>& records, std::uint64_t seed,
                                       std::size_t smote_k = kDefaultSmoteNeighbors);

}  // namespace dementia::health
