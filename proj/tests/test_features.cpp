#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sdforest/features.hpp"
#include "sdforest/tensor_io.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace sdf;

TEST(Handcrafted, ConstantFrame) {
  ImageFrame f(9, 7);
  std::fill(f.data.begin(), f.data.end(), std::uint8_t{128});
  const FeatureMap m = handcrafted_features(f);
  ASSERT_EQ(m.channels, kHandcraftedChannels);
  ASSERT_EQ(m.channels, 11);
  const float gray = m.at(kChannelGray, 0, 0);
  EXPECT_NEAR(gray, 128.0 / 255.0, 1e-6);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) {
      EXPECT_EQ(m.at(kChannelGradX, y, x), 0.0f);
      EXPECT_EQ(m.at(kChannelGradY, y, x), 0.0f);
      for (int c : {kChannelBlur1, kChannelBlur2, kChannelBlur4}) EXPECT_NEAR(m.at(c, y, x), gray, 1e-6);
    }
  }
}

TEST(Handcrafted, SinglePixelCoordinatesAreZero) {
  ImageFrame f(1, 1);
  f.data = {10, 20, 30};
  const FeatureMap m = handcrafted_features(f);
  EXPECT_EQ(m.at(kChannelCoordX, 0, 0), 0.0f);
  EXPECT_EQ(m.at(kChannelCoordY, 0, 0), 0.0f);
  EXPECT_NEAR(m.at(kChannelRed, 0, 0), 10.0 / 255.0, 1e-7);
  EXPECT_NEAR(m.at(kChannelBlue, 0, 0), 30.0 / 255.0, 1e-7);
}

TEST(Handcrafted, VerticalStepEdgeGradientSupport) {
  const int w = 12, h = 5, k = 6;
  ImageFrame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = k; x < w; ++x) {
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = 255;
    }
  }
  const FeatureMap m = handcrafted_features(f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float g = m.at(kChannelGradX, y, x);
      if (x == k - 1 || x == k) {
        EXPECT_NEAR(g, 1.0f, 1e-6) << x;
      } else {
        EXPECT_EQ(g, 0.0f) << x;
      }
      EXPECT_EQ(m.at(kChannelGradY, y, x), 0.0f);
    }
  }
}

TEST(Handcrafted, RangeAndCoordinates) {
  std::mt19937_64 rng(1);
  const ImageFrame f = sdf::testing::random_frame(20, 10, rng);
  const FeatureMap m = handcrafted_features(f);
  for (float v : m.values) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(m.at(kChannelCoordX, 3, 19), 1.0f);
  EXPECT_EQ(m.at(kChannelCoordY, 9, 0), 1.0f);
  EXPECT_NEAR(m.at(kChannelGray, 2, 3),
              (0.299 * f.at(3, 2, 0) + 0.587 * f.at(3, 2, 1) + 0.114 * f.at(3, 2, 2)) / 255.0, 1e-6);
  EXPECT_EQ(handcrafted_features(f), m);
}

TEST(GaussianBlur, PreservesConstantsAndRejectsBadSigma) {
  ConfidenceMap c(10, 10, 0.25);
  const auto b = gaussian_blur(c, 2.0);
  for (double v : b.data) EXPECT_NEAR(v, 0.25, 1e-12);
  EXPECT_SDF_ERROR(gaussian_blur(c, 0.0), Errc::invalid_argument);
}

TEST(Upsample, IdentityIsBitExact) {
  std::mt19937_64 rng(2);
  const FeatureMap m = sdf::testing::random_features(3, 6, 5, rng);
  EXPECT_EQ(bilinear_upsample(m, 6, 5), m);
}

TEST(Upsample, SinglePixelFillsTarget) {
  FeatureMap m(1, 1, 1, 0.7f);
  const FeatureMap up = bilinear_upsample(m, 4, 9);
  ASSERT_EQ(up.values.size(), 36u);
  for (float v : up.values) EXPECT_EQ(v, 0.7f);
}

TEST(Upsample, HalfPixelRow) {
  FeatureMap m(1, 1, 2);
  m.values = {0.0f, 1.0f};
  const FeatureMap up = bilinear_upsample(m, 1, 4);
  ASSERT_EQ(up.width, 4);
  EXPECT_NEAR(up.values[0], 0.0f, 1e-7);
  EXPECT_NEAR(up.values[1], 0.25f, 1e-7);
  EXPECT_NEAR(up.values[2], 0.75f, 1e-7);
  EXPECT_NEAR(up.values[3], 1.0f, 1e-7);
}

TEST(Upsample, StaysWithinInputRange) {
  std::mt19937_64 rng(3);
  const FeatureMap m = sdf::testing::random_features(2, 5, 7, rng);
  const FeatureMap up = bilinear_upsample(m, 23, 31);
  for (int c = 0; c < 2; ++c) {
    const auto src = m.channel(c);
    const auto dst = up.channel(c);
    const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
    for (float v : dst) {
      EXPECT_GE(v, *lo);
      EXPECT_LE(v, *hi);
    }
  }
  EXPECT_SDF_ERROR(bilinear_upsample(m, 0, 3), Errc::invalid_argument);
}

TEST(Concat, ChannelCountsAdd) {
  const FeatureMap a(11, 4, 4, 1.0f), b(208, 4, 4, 2.0f);
  const FeatureMap both[] = {a, b};
  const FeatureMap c = concat_features(both);
  EXPECT_EQ(c.channels, 219);
  EXPECT_EQ(c.at(10, 3, 3), 1.0f);
  EXPECT_EQ(c.at(11, 0, 0), 2.0f);
}

TEST(Concat, SingleMapAndMismatch) {
  std::mt19937_64 rng(4);
  const FeatureMap a = sdf::testing::random_features(3, 4, 5, rng);
  const FeatureMap one[] = {a};
  EXPECT_EQ(concat_features(one), a);
  const FeatureMap bad[] = {a, FeatureMap(1, 5, 5)};
  EXPECT_SDF_ERROR(concat_features(bad), Errc::shape_mismatch);
}

TEST(ExternalFeatures, UpsamplesToFrame) {
  sdf::testing::TempDir dir;
  Tensor t{{219, 8, 8}, std::vector<float>(219 * 64, 0.5f)};
  write_tensor(t, dir / "f.sdft");
  const FeatureMap m = load_external_features(dir / "f.sdft", 32, 32);
  EXPECT_EQ(m.channels, 219);
  EXPECT_EQ(m.height, 32);
  EXPECT_EQ(m.width, 32);
  EXPECT_EQ(m.at(200, 31, 31), 0.5f);
}

TEST(ExternalFeatures, FullResolutionUnchanged) {
  sdf::testing::TempDir dir;
  std::mt19937_64 rng(5);
  const FeatureMap src = sdf::testing::random_features(4, 6, 9, rng);
  write_tensor(to_tensor(src), dir / "f.sdft");
  EXPECT_EQ(load_external_features(dir / "f.sdft", 6, 9), src);
}

TEST(ExternalFeatures, RejectsWrongRankAndNaN) {
  sdf::testing::TempDir dir;
  write_tensor(Tensor{{4, 4}, std::vector<float>(16, 0.0f)}, dir / "r2.sdft");
  EXPECT_SDF_ERROR(load_external_features(dir / "r2.sdft", 4, 4), Errc::shape_mismatch);

  auto bytes = encode_tensor(Tensor{{1, 1, 2}, {0.0f, 0.0f}});
  bytes[bytes.size() - 1] = 0x7f;  // last float becomes NaN
  bytes[bytes.size() - 2] = 0xc0;
  sdf::testing::write_bytes(dir / "nan.sdft", bytes);
  EXPECT_SDF_ERROR(load_external_features(dir / "nan.sdft", 1, 2), Errc::non_finite);
}
