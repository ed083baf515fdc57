#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dementia/nn/layer_spec.hpp"
#include "dementia/nn/rng.hpp"
#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

template <typename T>
class Layer;

/// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(std::size_t fan_in, std::size_t fan_out) noexcept;

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// 1 / (1 - rate). Throws std::invalid_argument unless 0 <= rate < 1.
template <typename T>
BasicTensor<T> dropout_mask(const Shape& shape, double rate, Rng& rng);

/// Ordered layer stack with its parameters.
///
/// `forward` with `training == true` retains every intermediate activation
/// and dropout mask so that `backward` can follow. `predict` is const and
/// retains nothing, so one model may serve concurrent inference calls.
template <typename T>
class BasicModel {
 public:
  /// Propagates shapes through `layers` (throws ShapeError on failure) and
  /// initializes weights Glorot-uniform from `seed`, biases zero.
  BasicModel(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed);
  ~BasicModel();

  BasicModel(const BasicModel& other);
  BasicModel& operator=(const BasicModel& other);
  BasicModel(BasicModel&&) noexcept;
  BasicModel& operator=(BasicModel&&) noexcept;

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept;
  const std::vector<LayerSpec>& layers() const noexcept { return specs_; }
  std::size_t layer_count() const noexcept { return specs_.size(); }
  const Shape& layer_output_shape(std::size_t index) const { return shapes_.at(index + 1); }
  const Shape& layer_input_shape(std::size_t index) const { return shapes_.at(index); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Analytic weight + bias total.
  std::size_t param_count() const;

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  std::span<Parameter<T>> layer_parameters(std::size_t index);
  std::span<const Parameter<T>> layer_parameters(std::size_t index) const;

  /// `batch` is [batch] + input_shape.
  BasicTensor<T> forward(const BasicTensor<T>& batch, bool training, Rng& rng);
  BasicTensor<T> predict(const BasicTensor<T>& batch) const;
  /// Inference through layers [0, last_layer]; returns that layer's output.
  BasicTensor<T> predict_through(const BasicTensor<T>& batch, std::size_t last_layer) const;

  /// Writes d(loss)/d(param) into every Parameter::grad and, when requested,
  /// d(loss)/d(input) into `input_gradient`. Requires a preceding
  /// training-mode forward; throws std::logic_error otherwise. Retained
  /// activations are released afterwards.
  void backward(const BasicTensor<T>& loss_gradient, BasicTensor<T>* input_gradient = nullptr);

  bool has_retained_activations() const noexcept { return !activations_.empty(); }
  void release_activations() noexcept;
  void zero_grad();

 private:
  void check_batch(const BasicTensor<T>& batch) const;

  Shape input_shape_;
  std::vector<LayerSpec> specs_;
  std::vector<Shape> shapes_;  // shapes_[0] = input, shapes_[i + 1] = output of layer i
  std::uint64_t seed_ = 0;
  std::vector<std::unique_ptr<Layer<T>>> layers_;

  std::vector<BasicTensor<T>> activations_;
  std::vector<BasicTensor<T>> masks_;
};

using Model = BasicModel<float>;
using Model64 = BasicModel<double>;

/// Copies every parameter value of `from` into `to`, converting precision.
/// Both models must share an architecture.
template <typename From, typename To>
void copy_parameters(const BasicModel<From>& from, BasicModel<To>& to);

}  // namespace dementia::nn
