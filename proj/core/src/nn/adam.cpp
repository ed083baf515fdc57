#include "dementia/nn/adam.hpp"

#include <cmath>

namespace dementia::nn {

template <typename T>
Adam<T>::Adam(AdamOptions options, ParamList params) : options_(options) {
  if (!(options_.learning_rate >= 0.0)) throw std::invalid_argument("adam: learning rate must be >= 0");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto* p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

template <typename T>
void Adam<T>::step(ParamList params) {
  if (params.size() != m_.size()) throw std::invalid_argument("adam: parameter list changed size");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = *params[k];
    if (p.grad.shape() != p.value.shape() || p.value.shape() != m_[k].shape()) {
      throw std::invalid_argument("adam: shape mismatch for '" + p.name + "'");
    }
    for (const T g : p.grad.data()) {
      if (!std::isfinite(static_cast<double>(g))) throw NonFiniteGradient(p.name);
    }
  }

  ++step_count_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = options_.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.data();
    auto grad = params[k]->grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
      const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + options_.epsilon);
      value[i] = static_cast<T>(static_cast<double>(value[i]) - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dementia::nn
