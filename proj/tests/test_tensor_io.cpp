#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "sdforest/tensor_io.hpp"
#include "test_util.hpp"

using namespace sdf;
using sdf::testing::TempDir;

TEST(TensorFormat, GoldenBytesForTwoElementTensor) {
  const Tensor t{{2, 1, 1}, {0.0f, 1.0f}};
  const std::vector<std::uint8_t> expected = {
      'S', 'D', 'F', 'T', 1, 1, 3, 0,  // magic, version, dtype, ndim, reserved
      2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,  // extents
      0x00, 0x00, 0x00, 0x00,              // 0.0f
      0x00, 0x00, 0x80, 0x3f,              // 1.0f
  };
  const auto bytes = encode_tensor(t);
  EXPECT_EQ(bytes.size(), 8u + 12u + 8u);
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(decode_tensor(bytes), t);
}

TEST(TensorFormat, FileRoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> d(0.0f, 10.0f);
  Tensor t{{3, 5, 7}, {}};
  for (int i = 0; i < 105; ++i) t.data.push_back(d(rng));
  t.data[4] = -0.0f;
  t.data[9] = std::numeric_limits<float>::denorm_min();
  write_tensor(t, dir / "t.sdft");
  EXPECT_EQ(std::filesystem::file_size(dir / "t.sdft"), 8u + 4u * 3u + 4u * 105u);
  const Tensor back = read_tensor(dir / "t.sdft");
  ASSERT_EQ(back.dims, t.dims);
  ASSERT_EQ(back.data.size(), t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    EXPECT_EQ(std::signbit(back.data[i]), std::signbit(t.data[i]));
    EXPECT_EQ(back.data[i], t.data[i]);
  }
}

TEST(TensorFormat, RejectsEmptyDims) {
  EXPECT_SDF_ERROR(encode_tensor(Tensor{{}, {}}), Errc::invalid_argument);
  EXPECT_SDF_ERROR(encode_tensor(Tensor{{0}, {}}), Errc::invalid_argument);
}

TEST(TensorFormat, RejectsPayloadMismatchAndNonFiniteOnWrite) {
  EXPECT_SDF_ERROR(encode_tensor(Tensor{{3}, {1.0f}}), Errc::payload_mismatch);
  EXPECT_SDF_ERROR(encode_tensor(Tensor{{1}, {std::numeric_limits<float>::quiet_NaN()}}), Errc::non_finite);
}

TEST(TensorFormat, HeaderErrorsAreDistinct) {
  auto bytes = encode_tensor(Tensor{{2}, {1.0f, 2.0f}});
  auto bad = bytes;
  bad[0] = bad[1] = bad[2] = bad[3] = 'X';
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::bad_magic);
  bad = bytes;
  bad[4] = 2;
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::unsupported_version);
  bad = bytes;
  bad[5] = 2;
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::unsupported_format);
  bad = bytes;
  bad.pop_back();
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::payload_mismatch);
  bad = bytes;
  bad.push_back(0);
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::payload_mismatch);
  bad = bytes;
  bad[6] = 0;
  EXPECT_SDF_ERROR(decode_tensor(bad), Errc::invalid_argument);
  EXPECT_SDF_ERROR(decode_tensor({'S', 'D'}), Errc::bad_magic);
}

TEST(TensorFormat, MissingFile) {
  EXPECT_SDF_ERROR(read_tensor("/nonexistent/dir/x.sdft"), Errc::file_not_found);
}

TEST(TensorFormat, FeatureMapConversionKeepsLayout) {
  FeatureMap m(2, 3, 4);
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = static_cast<float>(i);
  const Tensor t = to_tensor(m);
  EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{2, 3, 4}));
  EXPECT_EQ(to_feature_map(t), m);
}

TEST(ImageIo, RoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(5);
  ImageFrame f(13, 7);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(rng());
  write_image(f, dir / "f.png");
  EXPECT_EQ(read_image(dir / "f.png"), f);
}

TEST(ImageIo, OneWhitePixel) {
  TempDir dir;
  ImageFrame f(1, 1);
  f.data = {255, 255, 255};
  write_image(f, dir / "w.png");
  const ImageFrame back = read_image(dir / "w.png");
  EXPECT_EQ(back.width, 1);
  EXPECT_EQ(back.height, 1);
  EXPECT_EQ(back.data, (std::vector<std::uint8_t>{255, 255, 255}));
}

TEST(ImageIo, GrayscaleIsReplicated) {
  TempDir dir;
  write_gray_png(3, 2, {0, 10, 20, 30, 40, 50}, dir / "g.png");
  const ImageFrame f = read_image(dir / "g.png");
  ASSERT_EQ(f.width, 3);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(f.at(1, 0, c), 10);
    EXPECT_EQ(f.at(2, 1, c), 50);
  }
}

TEST(ImageIo, TruncatedFileIsMalformed) {
  TempDir dir;
  ImageFrame f(16, 16);
  write_image(f, dir / "f.png");
  auto bytes = sdf::testing::read_bytes(dir / "f.png");
  bytes.resize(bytes.size() / 2);
  sdf::testing::write_bytes(dir / "t.png", bytes);
  EXPECT_SDF_ERROR(read_image(dir / "t.png"), Errc::malformed_png);
  sdf::testing::write_bytes(dir / "junk.png", {'n', 'o', 't', 'p', 'n', 'g', 0, 0, 0});
  EXPECT_SDF_ERROR(read_image(dir / "junk.png"), Errc::malformed_png);
}

TEST(ImageIo, MissingFile) { EXPECT_SDF_ERROR(read_image("/nonexistent.png"), Errc::file_not_found); }

TEST(MaskIo, AllZeroHasNoObjects) {
  TempDir dir;
  write_mask(LabelMask(4, 4), dir / "m.png");
  EXPECT_EQ(read_mask(dir / "m.png").num_objects(), 0);
}

TEST(MaskIo, CountsObjectsByMaxLabel) {
  TempDir dir;
  LabelMask m(3, 1);
  m.labels = {0, 1, 2};
  write_mask(m, dir / "m.png");
  EXPECT_EQ(read_mask(dir / "m.png").num_objects(), 2);
}

TEST(MaskIo, RandomRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(11);
  LabelMask m(31, 17);
  for (auto& v : m.labels) v = static_cast<std::uint8_t>(rng() % 4);
  write_mask(m, dir / "m.png");
  EXPECT_EQ(read_mask(dir / "m.png"), m);
}

TEST(MaskIo, RgbMaskAsksForConversion) {
  TempDir dir;
  write_image(ImageFrame(4, 4), dir / "rgb.png");
  try {
    read_mask(dir / "rgb.png");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_format);
    EXPECT_NE(std::string(e.what()).find("convert"), std::string::npos) << e.what();
  }
}
