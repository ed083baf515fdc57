#include "dementia/models/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace dementia::models {

namespace {

constexpr char kMagic[5] = {'M', 'O', 'D', 'W', '1'};
constexpr std::size_t kChecksumBytes = 4;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::size_t v) {
    if (v > UINT32_MAX) throw std::length_error("weights: value exceeds 32 bits");
    le(static_cast<std::uint32_t>(v));
  }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > in_.size() - pos_) throw WeightsError(WeightsError::Kind::Truncated, "unexpected end of data");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U le() {
    const auto s = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(s[i]) << (8 * i));
    return v;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  // Bounds an element count by the bytes left so corrupt counts fail early.
  std::size_t count(std::size_t element_bytes) { return bounded(u32(), element_bytes); }
  std::size_t count64(std::size_t element_bytes) { return bounded(u64(), element_bytes); }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;

  std::size_t bounded(std::uint64_t n, std::size_t element_bytes) const {
    if (n > (in_.size() - pos_) / element_bytes) throw WeightsError(WeightsError::Kind::Truncated, "count exceeds data");
    return static_cast<std::size_t>(n);
  }
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<nn::LayerSpec> expected_layers(Architecture arch, const nn::Shape& input) {
  if (arch == Architecture::Mod1D) {
    if (input != mod1d_input_shape()) throw WeightsError(WeightsError::Kind::Manifest, "MOD-1D input must be [6, 1]");
    return mod1d_layers();
  }
  if (input.size() != 3 || input[0] != input[1] || input[2] != 3)
    throw WeightsError(WeightsError::Kind::Manifest, "MOD-2D input must be [s, s, 3], got " + nn::to_string(input));
  return mod2d_layers(input[0]);
}

}  // namespace

WeightsError::WeightsError(Kind kind, const std::string& detail)
    : std::runtime_error([&] {
        switch (kind) {
          case Kind::BadMagic: return "weights: bad magic: " + detail;
          case Kind::Checksum: return "weights: checksum error: " + detail;
          case Kind::Truncated: return "weights: truncated: " + detail;
          case Kind::Manifest: return "weights: manifest mismatch: " + detail;
          case Kind::ArchitectureMismatch: return "weights: architecture-id error: " + detail;
        }
        return "weights: " + detail;
      }()),
      kind_(kind) {}

std::vector<std::uint8_t> serialize_weights(const nn::Model& model, Architecture arch, const Extras& extras) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(static_cast<std::uint8_t>(arch));
  w.u64(model.seed());
  w.u32(model.input_shape().size());
  for (std::size_t d : model.input_shape()) w.u32(d);
  w.u32(model.layer_count());
  for (const auto& spec : model.layers()) {
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u8(static_cast<std::uint8_t>(spec.activation));
    w.u32(spec.kernel.size());
    for (std::size_t k : spec.kernel) w.u32(k);
    w.u32(spec.units);
    w.f64(spec.dropout_rate);
  }
  w.u32(extras.size());
  for (const auto& [name, values] : extras) {
    w.u32(name.size());
    w.bytes(name.data(), name.size());
    w.u32(values.size());
    for (double v : values) w.f64(v);
  }
  const auto params = model.parameters();
  w.u32(params.size());
  for (const auto* p : params) {
    w.u64(p->value.size());
    for (float v : p->value.values()) w.f32(v);
  }
  const std::uint32_t crc = crc32_of(w.buffer());
  w.le(crc);
  return std::move(w.buffer());
}

LoadedModel deserialize_weights(std::span<const std::uint8_t> bytes, std::optional<Architecture> expected) {
  if (bytes.size() < sizeof kMagic + kChecksumBytes)
    throw WeightsError(WeightsError::Kind::Checksum, "file too short to carry a checksum");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw WeightsError(WeightsError::Kind::BadMagic, "not a MODW1 file");

  const auto body = bytes.first(bytes.size() - kChecksumBytes);
  Reader tail(bytes.last(kChecksumBytes));
  const std::uint32_t checksum = tail.u32();
  if (checksum != crc32_of(body)) throw WeightsError(WeightsError::Kind::Checksum, "CRC-32 does not match payload");

  Reader r(body);
  r.take(sizeof kMagic);
  const auto arch_id = r.u8();
  if (arch_id != 1 && arch_id != 2)
    throw WeightsError(WeightsError::Kind::Manifest, "unknown architecture id " + std::to_string(arch_id));
  const auto arch = static_cast<Architecture>(arch_id);
  if (expected && *expected != arch)
    throw WeightsError(WeightsError::Kind::ArchitectureMismatch, "file holds " + std::string(to_string(arch)) +
                                                                     ", expected " + std::string(to_string(*expected)));
  const std::uint64_t seed = r.u64();

  nn::Shape input(r.count(4));
  for (auto& d : input) d = r.u32();
  std::vector<nn::LayerSpec> layers(r.count(18));
  for (auto& spec : layers) {
    spec.kind = static_cast<nn::LayerKind>(r.u8());
    spec.activation = static_cast<nn::Activation>(r.u8());
    spec.kernel.resize(r.count(4));
    for (auto& k : spec.kernel) k = r.u32();
    spec.units = r.u32();
    spec.dropout_rate = r.f64();
  }
  if (layers != expected_layers(arch, input))
    throw WeightsError(WeightsError::Kind::Manifest,
                       "layer manifest does not match architecture " + std::string(to_string(arch)));

  Extras extras;
  const std::size_t n_extras = r.count(8);
  for (std::size_t e = 0; e < n_extras; ++e) {
    const auto name_bytes = r.take(r.count(1));
    std::vector<double> values(r.count(8));
    for (auto& v : values) v = r.f64();
    extras.emplace(std::string(name_bytes.begin(), name_bytes.end()), std::move(values));
  }

  nn::Model model(input, layers, seed);
  auto params = model.parameters();
  if (r.count(8) != params.size()) throw WeightsError(WeightsError::Kind::Manifest, "parameter tensor count");
  for (auto* p : params) {
    if (r.count64(4) != p->value.size())
      throw WeightsError(WeightsError::Kind::Manifest, "size of parameter '" + p->name + "'");
    for (float& v : p->value.data()) v = r.f32();
  }
  if (!r.done()) throw WeightsError(WeightsError::Kind::Manifest, "trailing bytes after payload");

  return {arch, std::move(model), std::move(extras), checksum};
}

void save_weights(const std::filesystem::path& path, const nn::Model& model, Architecture arch, const Extras& extras) {
  const auto bytes = serialize_weights(model, arch, extras);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write weights file " + path.string());
}

LoadedModel load_weights(const std::filesystem::path& path, std::optional<Architecture> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes, expected);
}

Extras scaler_extras(const health::ScalerParams& scaler) {
  return {{"scaler.mean", {scaler.mean.begin(), scaler.mean.end()}},
          {"scaler.scale", {scaler.scale.begin(), scaler.scale.end()}}};
}

health::ScalerParams scaler_from_extras(const Extras& extras) {
  const auto mean = extras.find("scaler.mean");
  const auto scale = extras.find("scaler.scale");
  if (mean == extras.end() || scale == extras.end())
    throw WeightsError(WeightsError::Kind::Manifest, "weights file carries no scaler");
  if (mean->second.size() != health::kFeatureCount || scale->second.size() != health::kFeatureCount)
    throw WeightsError(WeightsError::Kind::Manifest, "scaler must have 6 entries");
  health::ScalerParams p;
  for (std::size_t i = 0; i < health::kFeatureCount; ++i) {
    p.mean[i] = mean->second[i];
    p.scale[i] = scale->second[i];
    if (!(p.scale[i] > 0)) throw WeightsError(WeightsError::Kind::Manifest, "scaler scale must be positive");
  }
  return p;
}

}  // namespace dementia::models
