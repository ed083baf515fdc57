#pragma once

#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

inline constexpr double kBceEpsilon = 1e-7;

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> gradient;  // d(loss)/d(prediction), same shape as predictions
};

/// Mean binary cross-entropy over every element. Predictions are clamped to
/// [eps, 1 - eps]; the gradient is evaluated at the clamped value.
template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& targets);

}  // namespace dementia::nn
