#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dementia/health/preprocess.hpp"
#include "dementia/models/architectures.hpp"

namespace dementia::models {

/// Named float64 arrays stored beside the parameters.
using Extras = std::map<std::string, std::vector<double>>;

/// Container layout, all integers little-endian:
///   "MODW1" | u8 architecture | u64 seed | u32 rank, u32 dims...
///   | u32 layer count, per layer: u8 kind, u8 activation, u32 kernel rank,
///     u32 kernel dims..., u32 units, f64 dropout rate
///   | u32 extras count, per extra: u32 name length, name bytes, u32 n, f64 values...
///   | u32 tensor count, per tensor: u64 n, f32 values...
///   | u32 CRC-32 of every preceding byte
class WeightsError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, Checksum, Truncated, Manifest, ArchitectureMismatch };
  WeightsError(Kind kind, const std::string& detail);
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct LoadedModel {
  Architecture architecture;
  nn::Model model;
  Extras extras;
  std::uint32_t checksum = 0;  // the file's trailing CRC-32
};

std::vector<std::uint8_t> serialize_weights(const nn::Model& model, Architecture arch, const Extras& extras = {});

/// Verifies the checksum, then the architecture id against `expected` (if
/// given), then the layer manifest against the id.
LoadedModel deserialize_weights(std::span<const std::uint8_t> bytes, std::optional<Architecture> expected = {});

void save_weights(const std::filesystem::path& path, const nn::Model& model, Architecture arch,
                  const Extras& extras = {});
LoadedModel load_weights(const std::filesystem::path& path, std::optional<Architecture> expected = {});

Extras scaler_extras(const health::ScalerParams& scaler);
/// Throws WeightsError(Manifest) if the scaler entries are absent or malformed.
health::ScalerParams scaler_from_extras(const Extras& extras);

}  // namespace dementia::models
