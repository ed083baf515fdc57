#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dementia/nn/model.hpp"

namespace dementia::models {

enum class Architecture : std::uint8_t { Mod1D = 1, Mod2D = 2 };

std::string_view to_string(Architecture arch) noexcept;

inline constexpr std::size_t kMod2DSide = 224;

nn::Shape mod1d_input_shape();
std::vector<nn::LayerSpec> mod1d_layers();

/// At the reference side of 224 the dense widths are 512 and 256. Smaller
/// inputs (used for fast smoke runs) scale both widths by side / 224.
nn::Shape mod2d_input_shape(std::size_t side = kMod2DSide);
std::vector<nn::LayerSpec> mod2d_layers(std::size_t side = kMod2DSide);

nn::Model build_mod1d(std::uint64_t seed);
nn::Model build_mod2d(std::uint64_t seed, std::size_t side = kMod2DSide);

/// Index of the output unit holding the demented probability.
std::size_t score_unit(const nn::Model& model);

/// One row of a layer table: kind, per-sample output shape, parameter count.
struct LayerRow {
  nn::LayerKind kind;
  nn::Shape output_shape;
  std::size_t params;
  bool operator==(const LayerRow&) const = default;
};

std::vector<LayerRow> layer_table(const nn::Model& model);

/// Keras-style text summary, used by the CLI.
std::string format_summary(const nn::Model& model);

}  // namespace dementia::models
