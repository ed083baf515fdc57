#pragma once

// Central finite-difference oracle for BasicModel<double>. Only forward
// passes are used here, so the oracle stays independent of backward().

#include <cmath>
#include <functional>
#include <vector>

#include "dementia/nn/model.hpp"
#include "dementia/nn/rng.hpp"

namespace dementia::test {

struct GradientReport {
  double worst_relative_error = 0.0;
  std::size_t tensors_checked = 0;
};

/// Norm-wise relative error ||a - n|| / max(||a|| + ||n||, floor).
inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                             double floor = 1e-10) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::max(std::sqrt(na) + std::sqrt(nn), floor);
  return std::sqrt(diff) / denom;
}

/// Scalar objective sum(output * weights) for a training-mode forward with a
/// fresh copy of `rng` (so dropout masks repeat across evaluations).
inline double projected_output(nn::Model64& model, const nn::Tensor64& input, const nn::Tensor64& weights,
                               const nn::Rng& rng) {
  nn::Rng local = rng;
  const nn::Tensor64 out = model.forward(input, true, local);
  model.release_activations();
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
  return s;
}

/// Compares backward() against central differences for every parameter and
/// for the input. Returns the worst norm-wise relative error.
inline GradientReport check_model_gradients(nn::Model64& model, nn::Tensor64 input, const nn::Rng& rng,
                                            std::uint64_t projection_seed, double h = 1e-4) {
  nn::Rng prng(projection_seed);
  nn::Rng probe = rng;
  const nn::Tensor64 out = model.forward(input, true, probe);
  nn::Tensor64 weights(out.shape());
  for (auto& w : weights.data()) w = prng.uniform(-1.0, 1.0);

  nn::Tensor64 input_grad;
  model.backward(weights, &input_grad);

  GradientReport report;
  auto numeric_for = [&](std::span<double> values) {
    std::vector<double> numeric(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = projected_output(model, input, weights, rng);
      values[i] = saved - h;
      const double down = projected_output(model, input, weights, rng);
      values[i] = saved;
      numeric[i] = (up - down) / (2.0 * h);
    }
    return numeric;
  };

  for (auto* p : model.parameters()) {
    const std::vector<double> analytic(p->grad.data().begin(), p->grad.data().end());
    const auto numeric = numeric_for(p->value.data());
    report.worst_relative_error = std::max(report.worst_relative_error, relative_error(analytic, numeric));
    ++report.tensors_checked;
  }
  {
    const std::vector<double> analytic(input_grad.data().begin(), input_grad.data().end());
    const auto numeric = numeric_for(input.data());
    report.worst_relative_error = std::max(report.worst_relative_error, relative_error(analytic, numeric));
    ++report.tensors_checked;
  }
  return report;
}

inline nn::Tensor64 random_tensor(const nn::Shape& shape, nn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor64 t(shape);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace dementia::test
