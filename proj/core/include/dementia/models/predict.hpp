#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dementia/health/preprocess.hpp"
#include "dementia/health/record.hpp"
#include "dementia/models/architectures.hpp"
#include "dementia/nn/model.hpp"

namespace dementia::models {

enum class PredictedLabel : std::uint8_t { NonDemented = 0, Demented = 1 };

std::string_view to_string(PredictedLabel label) noexcept;

/// Strictly greater: a score of exactly 0.5 is non-demented.
constexpr PredictedLabel label_for_score(double score) noexcept {
  return score > 0.5 ? PredictedLabel::Demented : PredictedLabel::NonDemented;
}

struct PredictionResult {
  double score = 0.0;
  PredictedLabel label = PredictedLabel::NonDemented;
  Architecture model = Architecture::Mod1D;
};

class PayloadTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

PredictionResult predict_health(const nn::Model& model, const health::HealthRecord& record,
                                const health::ScalerParams& scaler);

/// Decodes, resizes to the model's input side, rescales and scores.
/// Throws PayloadTooLarge above 10 MB and image::ImageDecodeError on bad bytes.
PredictionResult predict_face(const nn::Model& model, std::span<const std::uint8_t> image_bytes);

/// Per-filter activations of the Conv2D layer at `layer_index` for one
/// [h, w, 3] image, each an [oh, ow] map min-max normalized to [0, 1]; a
/// constant map becomes all zeros. Throws std::invalid_argument if the
/// layer is not a Conv2D.
std::vector<nn::Tensor> extract_feature_maps(const nn::Model& model, const nn::Tensor& image, std::size_t layer_index);

/// Tiles [h, w] maps into one RGB image with a 1-pixel gap, `columns` wide.
nn::Tensor feature_map_grid(const std::vector<nn::Tensor>& maps, std::size_t columns = 8);

}  // namespace dementia::models
