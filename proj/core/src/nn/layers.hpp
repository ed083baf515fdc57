#pragma once

// Layer kernels. Internal to the nn module; only BasicModel constructs these.

#include <cmath>
#include <memory>
#include <vector>

#include "dementia/nn/layer_spec.hpp"
#include "dementia/nn/rng.hpp"
#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

template <typename T>
class Layer {
 public:
  Layer(LayerSpec spec, Shape in, Shape out)
      : spec_(std::move(spec)), in_(std::move(in)), out_(std::move(out)) {}
  virtual ~Layer() = default;

  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual void initialize(Rng& /*rng*/) {}

  /// `out` is pre-sized to [b] + output extents. `mask` is non-null only for
  /// dropout in training mode.
  virtual void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>* mask) const = 0;

  /// `grad_out` may be modified in place. Writes parameter gradients, and
  /// the input gradient when `grad_in` is non-null (pre-sized like `in`).
  virtual void backward(const BasicTensor<T>& in, const BasicTensor<T>& out, BasicTensor<T>& grad_out,
                        BasicTensor<T>* grad_in, const BasicTensor<T>* mask) = 0;

  const LayerSpec& spec() const noexcept { return spec_; }
  const Shape& input_shape() const noexcept { return in_; }
  const Shape& output_shape() const noexcept { return out_; }

  std::vector<Parameter<T>> params;

 protected:
  LayerSpec spec_;
  Shape in_;
  Shape out_;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& in, const Shape& out,
                                     std::size_t index);

inline double activate(Activation act, double z) noexcept {
  switch (act) {
    case Activation::ReLU: return z < 0.0 ? 0.0 : z;  // NaN passes through
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::None: break;
  }
  return z;
}

/// Derivative of the activation expressed through its output y.
inline double activation_slope(Activation act, double y) noexcept {
  switch (act) {
    case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::None: break;
  }
  return 1.0;
}

}  // namespace dementia::nn
