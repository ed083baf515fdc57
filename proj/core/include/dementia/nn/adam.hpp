#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dementia/nn/tensor.hpp"

namespace dementia::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(std::string parameter)
      : std::runtime_error("non-finite gradient in parameter '" + parameter + "'"),
        parameter_(std::move(parameter)) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

/// Bias-corrected Adam. Moments are stored in T; the update arithmetic is
/// carried out in double.
template <typename T>
class Adam {
 public:
  using ParamList = std::span<Parameter<T>* const>;

  Adam(AdamOptions options, ParamList params);

  /// Applies one update using each parameter's `grad`. Every gradient is
  /// checked for finiteness before any parameter is touched.
  void step(ParamList params);

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return step_count_; }
  const std::vector<BasicTensor<T>>& first_moment() const noexcept { return m_; }
  const std::vector<BasicTensor<T>>& second_moment() const noexcept { return v_; }

 private:
  AdamOptions options_;
  std::uint64_t step_count_ = 0;
  std::vector<BasicTensor<T>> m_;
  std::vector<BasicTensor<T>> v_;
};

}  // namespace dementia::nn
