#include "dementia/nn/layer_spec.hpp"

#include <numeric>
#include <sstream>

namespace dementia::nn {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv1D: return "Conv1D";
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::MaxPool1D: return "MaxPooling1D";
    case LayerKind::MaxPool2D: return "MaxPooling2D";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Dense: return "Dense";
    case LayerKind::Dropout: return "Dropout";
  }
  return "?";
}

std::string_view to_string(Activation activation) noexcept {
  switch (activation) {
    case Activation::None: return "none";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

LayerSpec LayerSpec::conv1d(std::size_t kernel, std::size_t filters, Activation act) {
  return {LayerKind::Conv1D, {kernel}, filters, act, 0.0};
}
LayerSpec LayerSpec::conv2d(std::size_t kh, std::size_t kw, std::size_t filters, Activation act) {
  return {LayerKind::Conv2D, {kh, kw}, filters, act, 0.0};
}
LayerSpec LayerSpec::max_pool1d() { return {LayerKind::MaxPool1D, {}, 0, Activation::None, 0.0}; }
LayerSpec LayerSpec::max_pool2d() { return {LayerKind::MaxPool2D, {}, 0, Activation::None, 0.0}; }
LayerSpec LayerSpec::flatten() { return {LayerKind::Flatten, {}, 0, Activation::None, 0.0}; }
LayerSpec LayerSpec::dense(std::size_t units, Activation act) {
  return {LayerKind::Dense, {}, units, act, 0.0};
}
LayerSpec LayerSpec::dropout(double rate) { return {LayerKind::Dropout, {}, 0, Activation::None, rate}; }

namespace {

std::string describe(const std::string& detail, std::size_t index, const Shape& expected,
                     const Shape& actual) {
  std::ostringstream out;
  out << "layer " << index << ": expected " << to_string(expected) << ", got " << to_string(actual);
  if (!detail.empty()) out << " (" << detail << ')';
  return out.str();
}

}  // namespace

ShapeError::ShapeError(std::size_t layer_index, Shape expected, Shape actual, const std::string& detail)
    : std::invalid_argument(describe(detail, layer_index, expected, actual)),
      layer_index_(layer_index),
      expected_(std::move(expected)),
      actual_(std::move(actual)) {}

Shape infer_output_shape(const LayerSpec& spec, const Shape& input, std::size_t index) {
  const auto fail = [&](Shape expected, const std::string& why) -> Shape {
    throw ShapeError(index, std::move(expected), input, std::string(to_string(spec.kind)) + ": " + why);
  };
  switch (spec.kind) {
    case LayerKind::Conv1D: {
      if (spec.kernel.size() != 1 || spec.kernel[0] == 0 || spec.units == 0) {
        fail({}, "kernel must be one positive extent and filters positive");
      }
      const std::size_t k = spec.kernel[0];
      if (input.size() != 2 || input[0] < k || input[1] == 0) fail({k, 1}, "input must be [length >= kernel, channels]");
      return {input[0] - k + 1, spec.units};
    }
    case LayerKind::Conv2D: {
      if (spec.kernel.size() != 2 || spec.kernel[0] == 0 || spec.kernel[1] == 0 || spec.units == 0) {
        fail({}, "kernel must be two positive extents and filters positive");
      }
      const std::size_t kh = spec.kernel[0], kw = spec.kernel[1];
      if (input.size() != 3 || input[0] < kh || input[1] < kw || input[2] == 0) {
        fail({kh, kw, 1}, "input must be [height, width, channels] at least the kernel");
      }
      return {input[0] - kh + 1, input[1] - kw + 1, spec.units};
    }
    case LayerKind::MaxPool1D:
      if (input.size() != 2 || input[0] < 2) fail({2, 1}, "input must be [length >= 2, channels]");
      return {input[0] / 2, input[1]};
    case LayerKind::MaxPool2D:
      if (input.size() != 3 || input[0] < 2 || input[1] < 2) fail({2, 2, 1}, "input must be [h >= 2, w >= 2, c]");
      return {input[0] / 2, input[1] / 2, input[2]};
    case LayerKind::Flatten:
      if (input.empty()) fail({1}, "input must have rank >= 1");
      return {element_count(input)};
    case LayerKind::Dense:
      if (spec.units == 0) fail({}, "units must be positive");
      if (input.size() != 1 || input[0] == 0) fail({input.empty() ? 1 : element_count(input)}, "input must be rank 1");
      return {spec.units};
    case LayerKind::Dropout:
      if (!(spec.dropout_rate >= 0.0 && spec.dropout_rate < 1.0)) fail(input, "dropout rate must be in [0, 1)");
      return input;
  }
  return fail({}, "unknown layer kind");
}

std::size_t parameter_count(const LayerSpec& spec, const Shape& input) {
  switch (spec.kind) {
    case LayerKind::Conv1D: return spec.kernel[0] * input.back() * spec.units + spec.units;
    case LayerKind::Conv2D: return spec.kernel[0] * spec.kernel[1] * input.back() * spec.units + spec.units;
    case LayerKind::Dense: return input[0] * spec.units + spec.units;
    default: return 0;
  }
}

}  // namespace dementia::nn
