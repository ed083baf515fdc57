#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dementia/nn/batch.hpp"
#include "dementia/nn/rng.hpp"
#include "dementia/nn/tensor.hpp"

namespace dementia::image {

inline constexpr std::size_t kImageSide = 224;
inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kMaxImageBytes = 10u * 1024u * 1024u;

/// Class labels are fixed here, independent of directory order.
inline constexpr int kDementedLabel = 1;
inline constexpr int kNonDementedLabel = 0;

inline constexpr std::array<const char*, 3> kSplitDirs = {"train", "validation", "test"};
inline constexpr std::array<const char*, 2> kClassDirs = {"non_demented", "demented"};  // indexed by label

class ImageDecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pixels are [side, side, 3] RGB in [0, 1], row-major HWC.
struct ImageSample {
  nn::Tensor pixels;
  int label = 0;
  std::string source_path;
};

/// Decodes PNG or JPEG bytes, widens grayscale to RGB, drops alpha, resizes
/// bilinearly to side x side and rescales by 1/255.
nn::Tensor decode_image(std::span<const std::uint8_t> bytes, std::size_t side = kImageSide);
nn::Tensor load_image_file(const std::filesystem::path& path, std::size_t side = kImageSide);

/// Lossless PNG encoding of an [h, w, 3] tensor in [0, 1].
std::vector<std::uint8_t> encode_png(const nn::Tensor& pixels);
void write_png(const std::filesystem::path& path, const nn::Tensor& pixels);

struct AugmentConfig {
  double rotation_max_deg = 20.0;
  double width_shift_frac = 0.1;
  double height_shift_frac = 0.1;
  double shear_max_deg = 10.0;
  double zoom_range = 0.1;
  bool horizontal_flip = true;
  std::uint64_t rng_seed = 0;

  static AugmentConfig identity() { return {0, 0, 0, 0, 0, false, 0}; }
  void validate() const;
};

/// Mirror left-right.
nn::Tensor flip_horizontal(const nn::Tensor& pixels);

/// One random affine transform with reflect-101 edge fill, then an optional
/// horizontal flip. An all-zero config returns the input unchanged.
nn::Tensor augment_pixels(const nn::Tensor& pixels, const AugmentConfig& config, nn::Rng& rng);
ImageSample augment(const ImageSample& sample, const AugmentConfig& config, nn::Rng& rng);

/// File lists per split and class; indexing does not decode.
struct DatasetIndex {
  // files[split][label]
  std::array<std::array<std::vector<std::filesystem::path>, 2>, 3> files;
  std::size_t count(std::size_t split, int label) const { return files.at(split).at(static_cast<std::size_t>(label)).size(); }
};

/// Expects <root>/{train,validation,test}/{demented,non_demented}/*.{png,jpg,jpeg}.
/// Missing or empty class directories are errors.
DatasetIndex index_dataset(const std::filesystem::path& root);

struct LoadReport {
  std::array<std::array<std::size_t, 2>, 3> loaded{};  // [split][label]
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

struct ImageDataset {
  std::vector<ImageSample> train, validation, test;
  LoadReport report;

  const std::vector<ImageSample>& split(std::size_t i) const;
};

/// Decodes every indexed file. Undecodable files are skipped and reported.
ImageDataset load_dataset(const std::filesystem::path& root, std::size_t side = kImageSide);

/// Non-owning batch source over a sample list; the samples must outlive it.
/// Epoch order and augmentation draws depend only on (seed, epoch).
class ImageBatcher final : public nn::BatchSource {
 public:
  ImageBatcher(std::span<const ImageSample> samples, std::size_t batch_size, std::uint64_t seed, bool augment_on,
               AugmentConfig config = {}, bool shuffle = true);

  void begin_epoch(std::uint64_t epoch) override;
  std::optional<nn::Batch> next() override;
  std::size_t sample_count() const override { return samples_.size(); }

 private:
  std::span<const ImageSample> samples_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  bool augment_on_;
  bool shuffle_;
  AugmentConfig config_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  nn::Rng augment_rng_;
};

/// Stacks [side, side, 3] samples into one [b, side, side, 3] tensor.
nn::Tensor stack_images(std::span<const nn::Tensor* const> images);

/// Two visually distinct procedural texture classes: warm stripes for
/// demented, cool soft blobs for non-demented, with per-image jitter and noise.
nn::Tensor synthesize_texture(int label, std::size_t side, nn::Rng& rng);

/// Writes a synthetic directory-structured corpus of PNG files.
/// per_split[s] is the per-class count for split s.
void synthesize_image_corpus(const std::filesystem::path& root, std::array<std::size_t, 3> per_split,
                             std::size_t side, std::uint64_t seed);

}  // namespace dementia::image
