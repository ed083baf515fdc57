#include "dementia/image/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace dementia::image {

namespace fs = std::filesystem;

namespace {

nn::Tensor from_mat(const cv::Mat& rgb_float) {
  const auto h = static_cast<std::size_t>(rgb_float.rows);
  const auto w = static_cast<std::size_t>(rgb_float.cols);
  nn::Tensor t({h, w, kChannels});
  cv::Mat view(rgb_float.rows, rgb_float.cols, CV_32FC3, t.data().data());
  rgb_float.copyTo(view);
  return t;
}

// Wraps tensor storage without copying.
cv::Mat as_mat(const nn::Tensor& t) {
  if (t.rank() != 3 || t.extent(2) != kChannels)
    throw std::invalid_argument("image tensor must be [h, w, 3], got " + nn::to_string(t.shape()));
  return cv::Mat(static_cast<int>(t.extent(0)), static_cast<int>(t.extent(1)), CV_32FC3,
                 const_cast<float*>(t.data().data()));
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void clamp_unit(nn::Tensor& t) {
  for (float& v : t.data()) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace

nn::Tensor decode_image(std::span<const std::uint8_t> bytes, std::size_t side) {
  if (bytes.empty()) throw ImageDecodeError("empty image payload");
  if (side == 0) throw std::invalid_argument("image side must be positive");
  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw ImageDecodeError(std::string("image decode failed: ") + e.what());
  }
  if (bgr.empty()) throw ImageDecodeError("undecodable image payload");

  cv::Mat rgb, scaled;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(scaled, CV_32FC3, 1.0 / 255.0);
  const int s = static_cast<int>(side);
  if (scaled.rows != s || scaled.cols != s) {
    cv::Mat resized;
    cv::resize(scaled, resized, cv::Size(s, s), 0, 0, cv::INTER_LINEAR);
    scaled = resized;
  }
  nn::Tensor t = from_mat(scaled);
  clamp_unit(t);
  return t;
}

nn::Tensor load_image_file(const fs::path& path, std::size_t side) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageDecodeError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes, side);
  } catch (const ImageDecodeError& e) {
    throw ImageDecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const nn::Tensor& pixels) {
  cv::Mat bytes8, bgr;
  as_mat(pixels).convertTo(bytes8, CV_8UC3, 255.0);
  cv::cvtColor(bytes8, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw std::runtime_error("png encoding failed");
  return out;
}

void write_png(const fs::path& path, const nn::Tensor& pixels) {
  const auto bytes = encode_png(pixels);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void AugmentConfig::validate() const {
  if (rotation_max_deg < 0 || width_shift_frac < 0 || height_shift_frac < 0 || shear_max_deg < 0 || zoom_range < 0)
    throw std::invalid_argument("augmentation magnitudes must be non-negative");
  if (zoom_range >= 1.0) throw std::invalid_argument("zoom_range must be below 1");
}

nn::Tensor flip_horizontal(const nn::Tensor& pixels) {
  cv::Mat flipped;
  cv::flip(as_mat(pixels), flipped, 1);
  return from_mat(flipped);
}

nn::Tensor augment_pixels(const nn::Tensor& pixels, const AugmentConfig& config, nn::Rng& rng) {
  config.validate();
  const cv::Mat src = as_mat(pixels);
  const double w = src.cols, h = src.rows;
  constexpr double kDeg = std::numbers::pi / 180.0;

  // Draws happen unconditionally so the stream position never depends on the config.
  const double theta = rng.uniform(-config.rotation_max_deg, config.rotation_max_deg) * kDeg;
  const double tx = rng.uniform(-config.width_shift_frac, config.width_shift_frac) * w;
  const double ty = rng.uniform(-config.height_shift_frac, config.height_shift_frac) * h;
  const double shear = rng.uniform(-config.shear_max_deg, config.shear_max_deg) * kDeg;
  const double zx = 1.0 + rng.uniform(-config.zoom_range, config.zoom_range);
  const double zy = 1.0 + rng.uniform(-config.zoom_range, config.zoom_range);
  const bool flip = rng.uniform() < 0.5 && config.horizontal_flip;

  nn::Tensor out;
  if (theta == 0 && tx == 0 && ty == 0 && shear == 0 && zx == 1 && zy == 1) {
    out = pixels;
  } else {
    // Linear part A = R(theta) * Shear * Zoom about the image centre.
    const double c = std::cos(theta), s = std::sin(theta);
    const double a00 = c * zx, a01 = (-s * std::cos(shear) - c * std::sin(shear)) * zy;
    const double a10 = s * zx, a11 = (c * std::cos(shear) - s * std::sin(shear)) * zy;
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const cv::Matx23d m(a00, a01, cx - a00 * cx - a01 * cy + tx,  //
                        a10, a11, cy - a10 * cx - a11 * cy + ty);
    cv::Mat dst;
    cv::warpAffine(src, dst, m, src.size(), cv::INTER_LINEAR, cv::BORDER_REFLECT_101);
    out = from_mat(dst);
    clamp_unit(out);
  }
  return flip ? flip_horizontal(out) : out;
}

ImageSample augment(const ImageSample& sample, const AugmentConfig& config, nn::Rng& rng) {
  return {augment_pixels(sample.pixels, config, rng), sample.label, sample.source_path};
}

DatasetIndex index_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw std::runtime_error("dataset root is not a directory: " + root.string());
  DatasetIndex index;
  for (std::size_t s = 0; s < kSplitDirs.size(); ++s) {
    for (std::size_t label = 0; label < kClassDirs.size(); ++label) {
      const fs::path dir = root / kSplitDirs[s] / kClassDirs[label];
      if (!fs::is_directory(dir)) throw std::runtime_error("missing class directory: " + dir.string());
      auto& files = index.files[s][label];
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
      if (files.empty()) throw std::runtime_error("empty class directory: " + dir.string());
      std::sort(files.begin(), files.end());
    }
  }
  return index;
}

const std::vector<ImageSample>& ImageDataset::split(std::size_t i) const {
  switch (i) {
    case 0: return train;
    case 1: return validation;
    case 2: return test;
    default: throw std::out_of_range("split index");
  }
}

ImageDataset load_dataset(const fs::path& root, std::size_t side) {
  const DatasetIndex index = index_dataset(root);
  ImageDataset ds;
  std::vector<ImageSample>* targets[] = {&ds.train, &ds.validation, &ds.test};
  for (std::size_t s = 0; s < kSplitDirs.size(); ++s) {
    for (std::size_t label = 0; label < kClassDirs.size(); ++label) {
      for (const auto& path : index.files[s][label]) {
        try {
          targets[s]->push_back({load_image_file(path, side), static_cast<int>(label), path.string()});
          ++ds.report.loaded[s][label];
        } catch (const ImageDecodeError& e) {
          ++ds.report.skipped;
          ds.report.warnings.push_back(std::string("skipped ") + e.what());
        }
      }
      if (ds.report.loaded[s][label] == 0)
        throw std::runtime_error(std::string("no decodable images in ") + kSplitDirs[s] + "/" + kClassDirs[label]);
    }
  }
  return ds;
}

nn::Tensor stack_images(std::span<const nn::Tensor* const> images) {
  if (images.empty()) throw std::invalid_argument("stack_images: no images");
  const nn::Shape& shape = images.front()->shape();
  nn::Shape batch_shape{images.size()};
  batch_shape.insert(batch_shape.end(), shape.begin(), shape.end());
  nn::Tensor out(batch_shape);
  const std::size_t stride = images.front()->size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i]->shape() != shape) throw std::invalid_argument("stack_images: mixed shapes");
    std::copy_n(images[i]->data().data(), stride, out.data().data() + i * stride);
  }
  return out;
}

ImageBatcher::ImageBatcher(std::span<const ImageSample> samples, std::size_t batch_size, std::uint64_t seed,
                           bool augment_on, AugmentConfig config, bool shuffle)
    : samples_(samples), batch_size_(batch_size), seed_(seed), augment_on_(augment_on), shuffle_(shuffle),
      config_(config) {
  if (samples_.empty()) throw std::invalid_argument("batcher: empty sample set");
  if (batch_size_ == 0) throw std::invalid_argument("batcher: batch size must be positive");
  config_.validate();
  for (const auto& s : samples_)
    if (s.pixels.shape() != samples_.front().pixels.shape())
      throw std::invalid_argument("batcher: samples have mixed shapes");
  begin_epoch(0);
}

void ImageBatcher::begin_epoch(std::uint64_t epoch) {
  order_.resize(samples_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (shuffle_) {
    nn::Rng rng(nn::mix_seed(seed_, epoch));
    rng.shuffle(order_.begin(), order_.end());
  }
  augment_rng_ = nn::Rng(nn::mix_seed(nn::mix_seed(seed_, epoch), config_.rng_seed + 1));
  cursor_ = 0;
}

std::optional<nn::Batch> ImageBatcher::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(cursor_ + batch_size_, order_.size());
  std::vector<nn::Tensor> augmented;
  std::vector<const nn::Tensor*> views;
  nn::Batch batch;
  augmented.reserve(end - cursor_);
  for (std::size_t i = cursor_; i < end; ++i) {
    const ImageSample& s = samples_[order_[i]];
    if (augment_on_) {
      augmented.push_back(augment_pixels(s.pixels, config_, augment_rng_));
      views.push_back(&augmented.back());
    } else {
      views.push_back(&s.pixels);
    }
    batch.labels.push_back(s.label);
  }
  batch.inputs = stack_images(views);
  cursor_ = end;
  return batch;
}

nn::Tensor synthesize_texture(int label, std::size_t side, nn::Rng& rng) {
  nn::Tensor t({side, side, kChannels});
  const double n = static_cast<double>(side);
  // Warm tint for demented, cool for non-demented, so the classes differ in
  // colour as well as structure.
  std::array<double, 3> tint;
  for (auto& c : tint) c = rng.uniform(0.35, 0.5);
  tint[label == kDementedLabel ? 0 : 2] += 0.2;

  if (label == kDementedLabel) {
    const double angle = rng.uniform(0, std::numbers::pi);
    const double period = n / rng.uniform(5.0, 8.0);
    const double phase = rng.uniform(0, 2 * std::numbers::pi);
    const double dx = std::cos(angle), dy = std::sin(angle);
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const double v = 0.5 + 0.45 * std::sin(2 * std::numbers::pi * (dx * x + dy * y) / period + phase);
        for (std::size_t c = 0; c < kChannels; ++c) t[(y * side + x) * kChannels + c] = static_cast<float>(v * tint[c] * 1.5);
      }
  } else {
    struct Blob { double x, y, r, a; };
    std::vector<Blob> blobs(3 + rng.below(3));
    for (auto& b : blobs) b = {rng.uniform(0, n), rng.uniform(0, n), rng.uniform(0.08, 0.2) * n, rng.uniform(0.4, 0.8)};
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        double v = 0.15;
        for (const auto& b : blobs) {
          const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
          v += b.a * std::exp(-d2 / (2 * b.r * b.r));
        }
        for (std::size_t c = 0; c < kChannels; ++c) t[(y * side + x) * kChannels + c] = static_cast<float>(v * tint[c] * 1.5);
      }
  }
  for (float& v : t.data()) v = std::clamp(v + static_cast<float>(rng.uniform(-0.04, 0.04)), 0.0f, 1.0f);
  return t;
}

void synthesize_image_corpus(const fs::path& root, std::array<std::size_t, 3> per_split, std::size_t side,
                             std::uint64_t seed) {
  for (std::size_t s = 0; s < kSplitDirs.size(); ++s) {
    for (std::size_t label = 0; label < kClassDirs.size(); ++label) {
      const fs::path dir = root / kSplitDirs[s] / kClassDirs[label];
      fs::create_directories(dir);
      nn::Rng rng(nn::mix_seed(seed, s * 2 + label));
      for (std::size_t i = 0; i < per_split[s]; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%05zu.png", i);
        write_png(dir / name, synthesize_texture(static_cast<int>(label), side, rng));
      }
    }
  }
}

}  // namespace dementia::image
