#include "dementia/models/predict.hpp"

#include <algorithm>
#include <string>

#include "dementia/image/dataset.hpp"
#include "dementia/models/training.hpp"

namespace dementia::models {

std::string_view to_string(PredictedLabel label) noexcept {
  return label == PredictedLabel::Demented ? "Demented" : "NonDemented";
}

namespace {

PredictionResult score_batch_of_one(const nn::Model& model, const nn::Tensor& input, Architecture arch) {
  const double score = scores_from_output(model.predict(input)).at(0);
  return {score, label_for_score(score), arch};
}

}  // namespace

PredictionResult predict_health(const nn::Model& model, const health::HealthRecord& record,
                                const health::ScalerParams& scaler) {
  if (model.input_shape() != mod1d_input_shape())
    throw std::invalid_argument("predict_health: model input must be [6, 1], got " + nn::to_string(model.input_shape()));
  const health::FeatureVector row = scaler.transform(health::categorize(record).values());
  return score_batch_of_one(model, health::to_input_tensor(std::span(&row, 1)), Architecture::Mod1D);
}

PredictionResult predict_face(const nn::Model& model, std::span<const std::uint8_t> image_bytes) {
  if (image_bytes.size() > image::kMaxImageBytes)
    throw PayloadTooLarge("image payload exceeds 10 MB (" + std::to_string(image_bytes.size()) + " bytes)");
  const nn::Shape& in = model.input_shape();
  if (in.size() != 3 || in[0] != in[1] || in[2] != image::kChannels)
    throw std::invalid_argument("predict_face: model input must be [s, s, 3], got " + nn::to_string(in));
  nn::Tensor pixels = image::decode_image(image_bytes, in[0]);
  pixels.reshape({1, in[0], in[1], in[2]});
  return score_batch_of_one(model, pixels, Architecture::Mod2D);
}

std::vector<nn::Tensor> extract_feature_maps(const nn::Model& model, const nn::Tensor& image, std::size_t layer_index) {
  if (layer_index >= model.layer_count() || model.layers()[layer_index].kind != nn::LayerKind::Conv2D)
    throw std::invalid_argument("feature maps: layer " + std::to_string(layer_index) + " is not a Conv2D layer");
  if (image.shape() != model.input_shape())
    throw std::invalid_argument("feature maps: image shape " + nn::to_string(image.shape()) + " does not match model input " +
                                nn::to_string(model.input_shape()));
  nn::Tensor batch = image;
  nn::Shape batched{1};
  batched.insert(batched.end(), image.shape().begin(), image.shape().end());
  batch.reshape(batched);
  const nn::Tensor act = model.predict_through(batch, layer_index);  // [1, oh, ow, filters]

  const std::size_t oh = act.extent(1), ow = act.extent(2), filters = act.extent(3);
  std::vector<nn::Tensor> maps;
  maps.reserve(filters);
  for (std::size_t f = 0; f < filters; ++f) {
    nn::Tensor m({oh, ow});
    float lo = act[f], hi = act[f];
    for (std::size_t p = 0; p < oh * ow; ++p) {
      const float v = act[p * filters + f];
      m[p] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const float range = hi - lo;
    for (float& v : m.data()) v = range > 0.0f ? (v - lo) / range : 0.0f;
    maps.push_back(std::move(m));
  }
  return maps;
}

nn::Tensor feature_map_grid(const std::vector<nn::Tensor>& maps, std::size_t columns) {
  if (maps.empty()) throw std::invalid_argument("feature_map_grid: no maps");
  if (columns == 0) throw std::invalid_argument("feature_map_grid: columns must be positive");
  const std::size_t h = maps[0].extent(0), w = maps[0].extent(1);
  const std::size_t cols = std::min(columns, maps.size());
  const std::size_t rows = (maps.size() + cols - 1) / cols;
  const std::size_t gh = rows * (h + 1) - 1, gw = cols * (w + 1) - 1;
  nn::Tensor grid({gh, gw, 3}, 1.0f);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].shape() != maps[0].shape()) throw std::invalid_argument("feature_map_grid: mixed map shapes");
    const std::size_t y0 = (i / cols) * (h + 1), x0 = (i % cols) * (w + 1);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t c = 0; c < 3; ++c) grid[((y0 + y) * gw + x0 + x) * 3 + c] = maps[i][y * w + x];
  }
  return grid;
}

}  // namespace dementia::models
