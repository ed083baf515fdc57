#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

/// One mini-batch: inputs are [b] + sample extents, labels are binary.
struct Batch {
  Tensor inputs;
  std::vector<int> labels;
};

/// Epoch-wise producer of mini-batches. Each epoch visits every sample once.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual void begin_epoch(std::uint64_t epoch) = 0;
  virtual std::optional<Batch> next() = 0;
  virtual std::size_t sample_count() const = 0;
};

}  // namespace dementia::nn
