#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dementia::nn {

/// Extents of a tensor, outermost first. Data is stored row-major.
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

/// Dense row-major array. Storage is T (float in production, double for
/// gradient checks); reductions over it are accumulated in double.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  void reshape(Shape shape) {
    if (element_count(shape) != data_.size()) {
      throw std::invalid_argument("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    shape_ = std::move(shape);
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// A trainable tensor and its gradient buffer (same shape).
template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
};

}  // namespace dementia::nn
