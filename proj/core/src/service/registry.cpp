#include "dementia/service/registry.hpp"

#include "dementia/models/weights.hpp"

namespace dementia::service {

ModelRegistry::ModelRegistry(nn::Model health_model, health::ScalerParams scaler, std::uint32_t health_checksum,
                             nn::Model face_model, std::uint32_t face_checksum)
    : health_model_(std::move(health_model)), scaler_(scaler), face_model_(std::move(face_model)) {
  if (health_model_.input_shape() != models::mod1d_input_shape())
    throw std::invalid_argument("health model must take [6, 1] input, got " + nn::to_string(health_model_.input_shape()));
  const nn::Shape& face_in = face_model_.input_shape();
  if (face_in.size() != 3 || face_in[0] != face_in[1] || face_in[2] != 3)
    throw std::invalid_argument("face model must take [s, s, 3] input, got " + nn::to_string(face_in));
  health_info_ = {models::Architecture::Mod1D, health_model_.param_count(), health_checksum};
  face_info_ = {models::Architecture::Mod2D, face_model_.param_count(), face_checksum};
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& weights_1d, const std::filesystem::path& weights_2d) {
  models::LoadedModel health = models::load_weights(weights_1d, models::Architecture::Mod1D);
  models::LoadedModel face = models::load_weights(weights_2d, models::Architecture::Mod2D);
  const health::ScalerParams scaler = models::scaler_from_extras(health.extras);
  return ModelRegistry(std::move(health.model), scaler, health.checksum, std::move(face.model), face.checksum);
}

models::PredictionResult ModelRegistry::predict_health(const health::HealthRecord& record) const {
  return models::predict_health(health_model_, record, scaler_);
}

models::PredictionResult ModelRegistry::predict_face(std::span<const std::uint8_t> image_bytes) const {
  return models::predict_face(face_model_, image_bytes);
}

}  // namespace dementia::service
