#pragma once

#include <cmath>

#include "dementia/nn/model.hpp"

namespace dementia::test {

inline void zero_parameters(nn::Model& m) {
  for (auto* p : m.parameters()) p->value.fill(0.0f);
}

// All weights zero, so the head emits sigmoid(logit) regardless of input.
inline nn::Model constant_model(nn::Model m, double probability) {
  zero_parameters(m);
  auto head = m.layer_parameters(m.layer_count() - 1);
  const float logit = static_cast<float>(std::log(probability / (1.0 - probability)));
  head[1].value[head[1].value.size() - 1] = logit;
  return m;
}

}  // namespace dementia::test
