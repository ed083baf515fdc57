#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

enum class LayerKind : std::uint8_t {
  Conv1D = 1,
  Conv2D = 2,
  MaxPool1D = 3,
  MaxPool2D = 4,
  Flatten = 5,
  Dense = 6,
  Dropout = 7,
};

enum class Activation : std::uint8_t { None = 0, ReLU = 1, Sigmoid = 2 };

std::string_view to_string(LayerKind kind) noexcept;
std::string_view to_string(Activation activation) noexcept;

/// Declarative description of one layer. Convolutions are "valid" with
/// stride 1; pools use a window of 2 and stride 2 along each spatial axis.
struct LayerSpec {
  LayerKind kind = LayerKind::Flatten;
  std::vector<std::size_t> kernel;  // conv only: {k} or {kh, kw}
  std::size_t units = 0;            // conv filters or dense units
  Activation activation = Activation::None;
  double dropout_rate = 0.0;

  static LayerSpec conv1d(std::size_t kernel, std::size_t filters, Activation act);
  static LayerSpec conv2d(std::size_t kh, std::size_t kw, std::size_t filters, Activation act);
  static LayerSpec max_pool1d();
  static LayerSpec max_pool2d();
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t units, Activation act);
  static LayerSpec dropout(double rate);

  bool operator==(const LayerSpec&) const = default;
};

/// Per-sample output extents of `spec` applied to `input`; throws ShapeError.
Shape infer_output_shape(const LayerSpec& spec, const Shape& input, std::size_t layer_index);

/// Weight + bias count of a layer with the given per-sample input extents.
std::size_t parameter_count(const LayerSpec& spec, const Shape& input);

class ShapeError : public std::invalid_argument {
 public:
  ShapeError(std::size_t layer_index, Shape expected, Shape actual, const std::string& detail = {});

  std::size_t layer_index() const noexcept { return layer_index_; }
  const Shape& expected() const noexcept { return expected_; }
  const Shape& actual() const noexcept { return actual_; }

 private:
  std::size_t layer_index_;
  Shape expected_;
  Shape actual_;
};

}  // namespace dementia::nn
