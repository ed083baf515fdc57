#include "dementia/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "dementia/nn/layer_spec.hpp"

namespace dementia::nn {

template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& predictions, const BasicTensor<T>& targets) {
  if (predictions.shape() != targets.shape()) {
    throw ShapeError(0, predictions.shape(), targets.shape(), "bce: targets must match predictions");
  }
  LossResult<T> result;
  result.gradient = BasicTensor<T>(predictions.shape());
  const double n = static_cast<double>(predictions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = std::clamp(static_cast<double>(predictions[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    const double t = targets[i];
    sum += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    result.gradient[i] = static_cast<T>((p - t) / (p * (1.0 - p)) / n);
  }
  result.loss = n > 0 ? -sum / n : 0.0;
  return result;
}

template LossResult<float> bce_loss<float>(const BasicTensor<float>&, const BasicTensor<float>&);
template LossResult<double> bce_loss<double>(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace dementia::nn
