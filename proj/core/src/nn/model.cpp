#include "dementia/nn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "layers.hpp"

namespace dementia::nn {

double glorot_bound(std::size_t fan_in, std::size_t fan_out) noexcept {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
BasicTensor<T> dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  BasicTensor<T> mask(shape, T{1});
  if (rate == 0.0) return mask;
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask.data()) m = rng.uniform() < rate ? T{0} : keep;
  return mask;
}

template <typename T>
BasicModel<T>::BasicModel(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), specs_(std::move(layers)), seed_(seed) {
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    shapes_.push_back(infer_output_shape(specs_[i], shapes_.back(), i));
  }
  Rng rng(seed_);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    layers_.push_back(make_layer<T>(specs_[i], shapes_[i], shapes_[i + 1], i));
    layers_.back()->initialize(rng);
  }
}

template <typename T>
BasicModel<T>::~BasicModel() = default;

template <typename T>
BasicModel<T>::BasicModel(const BasicModel& other)
    : input_shape_(other.input_shape_), specs_(other.specs_), shapes_(other.shapes_), seed_(other.seed_) {
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

template <typename T>
BasicModel<T>& BasicModel<T>::operator=(const BasicModel& other) {
  if (this != &other) {
    BasicModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
BasicModel<T>::BasicModel(BasicModel&&) noexcept = default;
template <typename T>
BasicModel<T>& BasicModel<T>::operator=(BasicModel&&) noexcept = default;

template <typename T>
const Shape& BasicModel<T>::output_shape() const noexcept {
  return shapes_.back();
}

template <typename T>
std::size_t BasicModel<T>::param_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) total += parameter_count(specs_[i], shapes_[i]);
  return total;
}

template <typename T>
std::vector<Parameter<T>*> BasicModel<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_)
    for (auto& p : layer->params) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> BasicModel<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& layer : layers_)
    for (const auto& p : layer->params) out.push_back(&p);
  return out;
}

template <typename T>
std::span<Parameter<T>> BasicModel<T>::layer_parameters(std::size_t index) {
  return layers_.at(index)->params;
}

template <typename T>
std::span<const Parameter<T>> BasicModel<T>::layer_parameters(std::size_t index) const {
  return layers_.at(index)->params;
}

template <typename T>
void BasicModel<T>::check_batch(const BasicTensor<T>& batch) const {
  const Shape& actual = batch.shape();
  const bool ok = actual.size() == input_shape_.size() + 1 && actual[0] > 0 &&
                  std::equal(input_shape_.begin(), input_shape_.end(), actual.begin() + 1);
  if (!ok) {
    Shape expected{actual.empty() ? 1 : actual[0]};
    expected.insert(expected.end(), input_shape_.begin(), input_shape_.end());
    throw ShapeError(0, expected, actual, "batch does not match model input");
  }
}

namespace {

Shape batched(std::size_t batch, const Shape& per_sample) {
  Shape s{batch};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

}  // namespace

template <typename T>
BasicTensor<T> BasicModel<T>::forward(const BasicTensor<T>& batch, bool training, Rng& rng) {
  if (!training) {
    release_activations();
    return predict(batch);
  }
  check_batch(batch);
  const std::size_t n = batch.extent(0);
  activations_.clear();
  masks_.assign(layers_.size(), BasicTensor<T>{});
  activations_.reserve(layers_.size() + 1);
  activations_.push_back(batch);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const BasicTensor<T>* mask = nullptr;
    if (specs_[i].kind == LayerKind::Dropout) {
      masks_[i] = dropout_mask<T>(activations_.back().shape(), specs_[i].dropout_rate, rng);
      mask = &masks_[i];
    }
    BasicTensor<T> out(batched(n, shapes_[i + 1]));
    layers_[i]->forward(activations_.back(), out, mask);
    activations_.push_back(std::move(out));
  }
  return activations_.back();
}

template <typename T>
BasicTensor<T> BasicModel<T>::predict(const BasicTensor<T>& batch) const {
  if (layers_.empty()) {
    check_batch(batch);
    return batch;
  }
  return predict_through(batch, layers_.size() - 1);
}

template <typename T>
BasicTensor<T> BasicModel<T>::predict_through(const BasicTensor<T>& batch, std::size_t last_layer) const {
  check_batch(batch);
  if (last_layer >= layers_.size()) {
    throw std::out_of_range("layer index " + std::to_string(last_layer) + " out of range");
  }
  const std::size_t n = batch.extent(0);
  BasicTensor<T> current = batch;
  for (std::size_t i = 0; i <= last_layer; ++i) {
    BasicTensor<T> out(batched(n, shapes_[i + 1]));
    layers_[i]->forward(current, out, nullptr);
    current = std::move(out);
  }
  return current;
}

template <typename T>
void BasicModel<T>::backward(const BasicTensor<T>& loss_gradient, BasicTensor<T>* input_gradient) {
  if (activations_.empty()) {
    throw std::logic_error("backward() requires a preceding training-mode forward()");
  }
  const Shape expected = activations_.back().shape();
  if (loss_gradient.shape() != expected) {
    throw ShapeError(layers_.empty() ? 0 : layers_.size() - 1, expected, loss_gradient.shape(),
                     "loss gradient does not match model output");
  }
  BasicTensor<T> grad = loss_gradient;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const BasicTensor<T>* mask = masks_[i].empty() ? nullptr : &masks_[i];
    if (i > 0 || input_gradient) {
      BasicTensor<T> grad_in(activations_[i].shape());
      layers_[i]->backward(activations_[i], activations_[i + 1], grad, &grad_in, mask);
      grad = std::move(grad_in);
    } else {
      layers_[i]->backward(activations_[i], activations_[i + 1], grad, nullptr, mask);
    }
  }
  if (input_gradient) *input_gradient = std::move(grad);
  release_activations();
}

template <typename T>
void BasicModel<T>::release_activations() noexcept {
  activations_.clear();
  activations_.shrink_to_fit();
  masks_.clear();
}

template <typename T>
void BasicModel<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T{0});
}

template <typename From, typename To>
void copy_parameters(const BasicModel<From>& from, BasicModel<To>& to) {
  if (from.layers() != to.layers() || from.input_shape() != to.input_shape()) {
    throw std::invalid_argument("copy_parameters: architectures differ");
  }
  auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto in = src[i]->value.data();
    auto out = dst[i]->value.data();
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = static_cast<To>(in[j]);
  }
}

template class BasicModel<float>;
template class BasicModel<double>;
template BasicTensor<float> dropout_mask<float>(const Shape&, double, Rng&);
template BasicTensor<double> dropout_mask<double>(const Shape&, double, Rng&);
template void copy_parameters<float, float>(const BasicModel<float>&, BasicModel<float>&);
template void copy_parameters<float, double>(const BasicModel<float>&, BasicModel<double>&);
template void copy_parameters<double, float>(const BasicModel<double>&, BasicModel<float>&);
template void copy_parameters<double, double>(const BasicModel<double>&, BasicModel<double>&);

}  // namespace dementia::nn
