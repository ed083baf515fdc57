#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dementia/image/dataset.hpp"
#include "support/temp_dir.hpp"

using namespace dementia::image;
using dementia::nn::Rng;
using dementia::nn::Shape;
using dementia::nn::Tensor;
namespace fs = std::filesystem;

namespace {

double mean_of(const Tensor& t) {
  return std::accumulate(t.values().begin(), t.values().end(), 0.0) / static_cast<double>(t.size());
}

std::vector<ImageSample> texture_samples(std::size_t n, std::size_t side, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ImageSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    out.push_back({synthesize_texture(label, side, rng), label, "mem" + std::to_string(i)});
  }
  return out;
}

}  // namespace

TEST(Decode, RescalesAndResizes) {
  cv::Mat white(10, 20, CV_8UC3, cv::Scalar(255, 255, 255));
  std::vector<std::uint8_t> png;
  cv::imencode(".png", white, png);
  const Tensor t = decode_image(png);
  EXPECT_EQ(t.shape(), (Shape{224, 224, 3}));
  for (float v : t.values()) EXPECT_EQ(v, 1.0f);
}

TEST(Decode, ChannelOrderIsRgb) {
  cv::Mat img(4, 4, CV_8UC3, cv::Scalar(0, 0, 255));  // pure red in BGR order
  std::vector<std::uint8_t> png;
  cv::imencode(".png", img, png);
  const Tensor t = decode_image(png, 4);
  EXPECT_EQ(t[0], 1.0f);
  EXPECT_EQ(t[1], 0.0f);
  EXPECT_EQ(t[2], 0.0f);
}

TEST(Decode, GrayscaleIsReplicated) {
  cv::Mat gray(8, 8, CV_8UC1);
  for (int i = 0; i < 64; ++i) gray.data[i] = static_cast<std::uint8_t>(i * 4);
  std::vector<std::uint8_t> png;
  cv::imencode(".png", gray, png);
  const Tensor t = decode_image(png, 8);
  for (std::size_t p = 0; p < 64; ++p) {
    EXPECT_FLOAT_EQ(t[p * 3], static_cast<float>(p * 4) / 255.0f);
    EXPECT_EQ(t[p * 3], t[p * 3 + 1]);
    EXPECT_EQ(t[p * 3], t[p * 3 + 2]);
  }
}

TEST(Decode, JpegAndGarbage) {
  cv::Mat img(32, 32, CV_8UC3, cv::Scalar(10, 200, 30));
  std::vector<std::uint8_t> jpg;
  cv::imencode(".jpg", img, jpg);
  const Tensor t = decode_image(jpg, 32);
  EXPECT_NEAR(t[1], 200.0 / 255.0, 0.02);

  const std::vector<std::uint8_t> garbage(100, 0x42);
  EXPECT_THROW(decode_image(garbage), ImageDecodeError);
  EXPECT_THROW(decode_image({}), ImageDecodeError);
}

TEST(Decode, PngRoundTripIsLossless) {
  Rng rng(1);
  Tensor t = synthesize_texture(1, 16, rng);
  for (float& v : t.data()) v = std::round(v * 255.0f) / 255.0f;
  const Tensor back = decode_image(encode_png(t), 16);
  ASSERT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back[i], t[i], 1e-6) << i;
}

TEST(Augment, IdentityConfigIsIdentity) {
  Rng data_rng(2), rng(3);
  const Tensor t = synthesize_texture(0, 32, data_rng);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(augment_pixels(t, AugmentConfig::identity(), rng), t);
}

TEST(Augment, FlipIsInvolution) {
  Rng data_rng(4);
  const Tensor t = synthesize_texture(1, 24, data_rng);
  const Tensor f = flip_horizontal(t);
  EXPECT_NE(f, t);
  EXPECT_EQ(f[0], t[23 * 3]);
  EXPECT_EQ(flip_horizontal(f), t);
}

TEST(Augment, PreservesShapeRangeAndLabel) {
  Rng data_rng(5), rng(6);
  const auto samples = texture_samples(6, 48, 7);
  for (const auto& s : samples) {
    const ImageSample a = augment(s, AugmentConfig{}, rng);
    EXPECT_EQ(a.label, s.label);
    EXPECT_EQ(a.pixels.shape(), s.pixels.shape());
    for (float v : a.pixels.values()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Augment, RotationMeanDriftIsSmall) {
  AugmentConfig rot = AugmentConfig::identity();
  rot.rotation_max_deg = 20;
  Rng data_rng(8), rng(9);
  double total = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor t = synthesize_texture(trial % 2, 64, data_rng);
    total += std::abs(mean_of(augment_pixels(t, rot, rng)) - mean_of(t));
  }
  EXPECT_LE(total / 100.0, 0.05);
}

TEST(Augment, RejectsNegativeMagnitudes) {
  AugmentConfig bad;
  bad.shear_max_deg = -1;
  Rng rng(1);
  EXPECT_THROW(augment_pixels(Tensor({4, 4, 3}), bad, rng), std::invalid_argument);
}

TEST(Batcher, SizesAndDeterminism) {
  const auto samples = texture_samples(360, 8, 11);
  ImageBatcher a(samples, 32, 5, false), b(samples, 32, 5, false);
  std::vector<std::size_t> sizes;
  while (true) {
    auto x = a.next();
    auto y = b.next();
    ASSERT_EQ(x.has_value(), y.has_value());
    if (!x) break;
    EXPECT_EQ(x->inputs, y->inputs);
    EXPECT_EQ(x->inputs.shape(), (Shape{x->labels.size(), 8, 8, 3}));
    for (int l : x->labels) EXPECT_TRUE(l == 0 || l == 1);
    sizes.push_back(x->labels.size());
  }
  std::vector<std::size_t> expected(11, 32);
  expected.push_back(8);
  EXPECT_EQ(sizes, expected);
}

TEST(Batcher, AugmentationOnlyWhenEnabled) {
  const auto samples = texture_samples(4, 16, 12);
  ImageBatcher plain(samples, 4, 1, false, AugmentConfig{}, false);
  const auto batch = plain.next();
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_TRUE(std::equal(samples[i].pixels.values().begin(), samples[i].pixels.values().end(),
                           batch->inputs.values().begin() + static_cast<std::ptrdiff_t>(i * samples[i].pixels.size())));

  ImageBatcher aug1(samples, 4, 1, true), aug2(samples, 4, 1, true);
  aug1.begin_epoch(2);
  aug2.begin_epoch(2);
  const auto x = aug1.next(), y = aug2.next();
  EXPECT_EQ(x->inputs, y->inputs);
  EXPECT_NE(x->inputs, batch->inputs);
}

TEST(Dataset, IndexCountsFullSizeCorpusWithoutDecoding) {
  dementia::test::TempDir dir;
  const std::size_t counts[3] = {630, 90, 180};
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t l = 0; l < 2; ++l) {
      const fs::path d = dir.path() / kSplitDirs[s] / kClassDirs[l];
      fs::create_directories(d);
      for (std::size_t i = 0; i < counts[s]; ++i) std::ofstream(d / ("f" + std::to_string(i) + ".jpg"));
      std::ofstream(d / "notes.txt");
    }
  const DatasetIndex index = index_dataset(dir.path());
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(index.count(s, 0), counts[s]);
    EXPECT_EQ(index.count(s, 1), counts[s]);
  }
}

TEST(Dataset, LoadSkipsUndecodableAndRejectsEmptyClass) {
  dementia::test::TempDir dir;
  synthesize_image_corpus(dir.path(), {3, 2, 2}, 20, 4);
  std::ofstream(dir.path() / "train" / "demented" / "broken.png") << "not a png";

  const ImageDataset ds = load_dataset(dir.path(), 16);
  EXPECT_EQ(ds.train.size(), 6u);
  EXPECT_EQ(ds.validation.size(), 4u);
  EXPECT_EQ(ds.test.size(), 4u);
  EXPECT_EQ(ds.report.skipped, 1u);
  ASSERT_EQ(ds.report.warnings.size(), 1u);
  EXPECT_NE(ds.report.warnings[0].find("broken.png"), std::string::npos);
  EXPECT_EQ(ds.report.loaded[0][1], 3u);
  for (const auto& s : ds.train) {
    EXPECT_EQ(s.pixels.shape(), (Shape{16, 16, 3}));
    EXPECT_EQ(s.label, s.source_path.find("non_demented") == std::string::npos ? kDementedLabel : kNonDementedLabel);
  }

  for (const auto& e : fs::directory_iterator(dir.path() / "test" / "non_demented")) fs::remove(e.path());
  EXPECT_THROW(index_dataset(dir.path()), std::runtime_error);
  fs::remove_all(dir.path() / "test");
  EXPECT_THROW(index_dataset(dir.path()), std::runtime_error);
}
