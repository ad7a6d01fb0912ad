#include <set>

#include <gtest/gtest.h>

#include "sdforest/sampler.hpp"
#include "test_util.hpp"

using namespace sdf;

namespace {

FeatureMap index_features(int h, int w) {
  FeatureMap f(2, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.at(0, y, x) = static_cast<float>(x);
      f.at(1, y, x) = static_cast<float>(y);
    }
  }
  return f;
}

}  // namespace

TEST(Sampler, WindowPlusStrideCount) {
  const FeatureMap f = index_features(100, 100);
  const LabelMask m(100, 100);
  const PixelDataset d = build_training_set(f, m, {0, 0, 40, 40}, 10);
  EXPECT_EQ(d.size(), 1684u);
  EXPECT_EQ(d.num_features, 2);
  EXPECT_EQ(d.features.size(), 1684u * 2u);
}

TEST(Sampler, FullWindowHasNoStridedRows) {
  const FeatureMap f = index_features(13, 17);
  const PixelDataset d = build_training_set(f, LabelMask(17, 13), {0, 0, 17, 13}, 3);
  EXPECT_EQ(d.size(), 13u * 17u);
}

TEST(Sampler, OrderingLabelsAndFeatures) {
  const FeatureMap f = index_features(20, 20);
  LabelMask m(20, 20);
  m(5, 5) = 1;
  m(0, 0) = 1;  // outside the window, kept with its label
  const PixelDataset d = build_training_set(f, m, {4, 4, 3, 2}, 10);
  ASSERT_EQ(d.size(), 6u + 4u);
  EXPECT_EQ(d.positions[0], (std::array<int, 2>{4, 4}));
  EXPECT_EQ(d.positions[1], (std::array<int, 2>{5, 4}));
  EXPECT_EQ(d.positions[3], (std::array<int, 2>{4, 5}));
  EXPECT_EQ(d.labels[4], 1);
  EXPECT_EQ(d.positions[6], (std::array<int, 2>{0, 0}));
  EXPECT_EQ(d.labels[6], 1);
  EXPECT_EQ(d.positions[9], (std::array<int, 2>{10, 10}));
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.row(i)[0], static_cast<float>(d.positions[i][0]));
    EXPECT_EQ(d.row(i)[1], static_cast<float>(d.positions[i][1]));
  }
  EXPECT_EQ(d.distinct_classes(), 2);
  EXPECT_FALSE(d.single_class());
}

TEST(Sampler, PositionsAreUniqueAndShrinkingWindowNeverAddsRows) {
  const FeatureMap f = index_features(37, 41);
  const LabelMask m(41, 37);
  std::size_t previous = SIZE_MAX;
  for (int s = 30; s >= 1; s -= 4) {
    const PixelDataset d = build_training_set(f, m, {5, 3, s, s}, 4);
    std::set<std::array<int, 2>> seen(d.positions.begin(), d.positions.end());
    EXPECT_EQ(seen.size(), d.size());
    const std::size_t window_rows = static_cast<std::size_t>(s) * s;
    EXPECT_LE(window_rows, previous);
    previous = window_rows;
  }
}

TEST(Sampler, SingleClassIsFlagged) {
  const PixelDataset d = build_training_set(index_features(10, 10), LabelMask(10, 10), {0, 0, 3, 3}, 5);
  EXPECT_TRUE(d.single_class());
}

TEST(Sampler, Errors) {
  const FeatureMap f = index_features(10, 10);
  EXPECT_SDF_ERROR(build_training_set(f, LabelMask(9, 10), {0, 0, 3, 3}, 2), Errc::shape_mismatch);
  EXPECT_SDF_ERROR(build_training_set(f, LabelMask(10, 10), {0, 0, 3, 3}, 0), Errc::invalid_argument);
  EXPECT_SDF_ERROR(build_training_set(f, LabelMask(10, 10), {20, 20, 3, 3}, 2), Errc::invalid_argument);
}
