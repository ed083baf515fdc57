#pragma once

#include <cstdint>
#include <filesystem>

#include "dementia/health/preprocess.hpp"
#include "dementia/health/record.hpp"
#include "dementia/models/predict.hpp"
#include "dementia/nn/model.hpp"

namespace dementia::service {

struct ModelInfo {
  models::Architecture architecture;
  std::size_t params = 0;
  std::uint32_t checksum = 0;  // CRC-32 of the weights file
};

/// Both trained models plus the health scaler. Immutable once built, so
/// concurrent requests may share it.
class ModelRegistry {
 public:
  ModelRegistry(nn::Model health_model, health::ScalerParams scaler, std::uint32_t health_checksum,
                nn::Model face_model, std::uint32_t face_checksum);

  /// Loads MOD-1D (with its scaler extras) and MOD-2D weights files.
  static ModelRegistry load(const std::filesystem::path& weights_1d, const std::filesystem::path& weights_2d);

  models::PredictionResult predict_health(const health::HealthRecord& record) const;
  models::PredictionResult predict_face(std::span<const std::uint8_t> image_bytes) const;

  const ModelInfo& health_info() const noexcept { return health_info_; }
  const ModelInfo& face_info() const noexcept { return face_info_; }

 private:
  nn::Model health_model_;
  health::ScalerParams scaler_;
  nn::Model face_model_;
  ModelInfo health_info_;
  ModelInfo face_info_;
};

}  // namespace dementia::service
