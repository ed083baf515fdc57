#include "dementia/models/architectures.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dementia::models {

using nn::Activation;
using nn::LayerSpec;

std::string_view to_string(Architecture arch) noexcept {
  switch (arch) {
    case Architecture::Mod1D: return "MOD-1D-CNN";
    case Architecture::Mod2D: return "MOD-2D-CNN";
  }
  return "unknown";
}

nn::Shape mod1d_input_shape() { return {6, 1}; }

std::vector<LayerSpec> mod1d_layers() {
  return {
      LayerSpec::conv1d(2, 64, Activation::ReLU),
      LayerSpec::conv1d(2, 64, Activation::ReLU),
      LayerSpec::dropout(0.2),
      LayerSpec::max_pool1d(),
      LayerSpec::flatten(),
      LayerSpec::dense(100, Activation::ReLU),
      LayerSpec::dense(2, Activation::Sigmoid),
  };
}

nn::Shape mod2d_input_shape(std::size_t side) { return {side, side, 3}; }

std::vector<LayerSpec> mod2d_layers(std::size_t side) {
  const auto width = [side](std::size_t reference) {
    if (side == kMod2DSide) return reference;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                        static_cast<double>(reference) * static_cast<double>(side) / kMod2DSide)));
  };
  return {
      LayerSpec::conv2d(3, 3, 32, Activation::ReLU),
      LayerSpec::max_pool2d(),
      LayerSpec::conv2d(3, 3, 64, Activation::ReLU),
      LayerSpec::max_pool2d(),
      LayerSpec::conv2d(3, 3, 128, Activation::ReLU),
      LayerSpec::max_pool2d(),
      LayerSpec::conv2d(3, 3, 256, Activation::ReLU),
      LayerSpec::max_pool2d(),
      LayerSpec::flatten(),
      LayerSpec::dense(width(512), Activation::ReLU),
      LayerSpec::dropout(0.5),
      LayerSpec::dense(width(256), Activation::ReLU),
      LayerSpec::dropout(0.5),
      LayerSpec::dense(1, Activation::Sigmoid),
  };
}

nn::Model build_mod1d(std::uint64_t seed) { return nn::Model(mod1d_input_shape(), mod1d_layers(), seed); }

nn::Model build_mod2d(std::uint64_t seed, std::size_t side) {
  return nn::Model(mod2d_input_shape(side), mod2d_layers(side), seed);
}

std::size_t score_unit(const nn::Model& model) {
  const nn::Shape& out = model.output_shape();
  if (out.size() != 1 || out[0] == 0 || out[0] > 2)
    throw std::invalid_argument("score_unit: expected a 1- or 2-unit head, got " + nn::to_string(out));
  return out[0] - 1;
}

std::vector<LayerRow> layer_table(const nn::Model& model) {
  std::vector<LayerRow> rows;
  for (std::size_t i = 0; i < model.layer_count(); ++i)
    rows.push_back({model.layers()[i].kind, model.layer_output_shape(i),
                    nn::parameter_count(model.layers()[i], model.layer_input_shape(i))});
  return rows;
}

std::string format_summary(const nn::Model& model) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-4s %-14s %-22s %12s\n", "#", "Layer", "Output Shape", "Param #");
  out << line;
  const auto rows = layer_table(model);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string shape = "(None";
    for (std::size_t d : rows[i].output_shape) shape += ", " + std::to_string(d);
    shape += ")";
    std::snprintf(line, sizeof line, "%-4zu %-14s %-22s %12zu\n", i, std::string(nn::to_string(rows[i].kind)).c_str(),
                  shape.c_str(), rows[i].params);
    out << line;
  }
  out << "Total params: " << model.param_count() << "\n";
  return out.str();
}

}  // namespace dementia::models
