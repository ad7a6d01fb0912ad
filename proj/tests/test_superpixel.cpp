#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sdforest/superpixel.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace sdf;

TEST(Slic, SingleClusterIsGlobalMean) {
  std::mt19937_64 rng(1);
  const ImageFrame f = sdf::testing::random_frame(17, 11, rng);
  const SuperpixelLabels sp = slic(f, {1, 10.0, 5});
  ASSERT_EQ(sp.k(), 1);
  double r = 0, x = 0;
  for (int yy = 0; yy < 11; ++yy) {
    for (int xx = 0; xx < 17; ++xx) {
      EXPECT_EQ(sp(xx, yy), 0);
      r += f.at(xx, yy, 0);
      x += xx;
    }
  }
  EXPECT_NEAR(sp.centers[0].r, r / (17 * 11), 1e-9);
  EXPECT_NEAR(sp.centers[0].x, x / (17 * 11), 1e-9);
}

TEST(Slic, UniformFrameAssignsBySpaceOnly) {
  ImageFrame f(32, 32);
  std::fill(f.data.begin(), f.data.end(), std::uint8_t{90});
  const SuperpixelLabels sp = slic(f, {4, 10.0, 10});
  ASSERT_EQ(sp.k(), 4);
  // Seeds sit at (8,8),(24,8),(8,24),(24,24); ties on the midlines go to the lower id.
  std::set<std::array<int, 2>> centers;
  for (const auto& c : sp.centers) centers.insert({static_cast<int>(std::lround(c.x * 2)), static_cast<int>(std::lround(c.y * 2))});
  EXPECT_EQ(centers, (std::set<std::array<int, 2>>{{16, 16}, {48, 16}, {16, 48}, {48, 48}}));
  const double s = slic_detail::grid_interval(32, 32, 4);
  EXPECT_EQ(sp.labels, oracle::brute_slic_assign(f, sp.centers, 10.0, s));
}

TEST(Slic, TwoColourFrameSplitsAtBoundary) {
  ImageFrame f(40, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool left = x < 20;
      f.at(x, y, 0) = left ? 250 : 10;
      f.at(x, y, 1) = left ? 30 : 200;
      f.at(x, y, 2) = left ? 30 : 60;
    }
  }
  const SuperpixelLabels sp = slic(f, {2, 0.5, 10});
  ASSERT_EQ(sp.k(), 2);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) EXPECT_EQ(sp(x, y), sp(0, 0) == 0 ? (x < 20 ? 0 : 1) : (x < 20 ? 1 : 0));
  }
}

TEST(Slic, AssignmentMatchesBruteForceOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const ImageFrame f = sdf::testing::random_frame(30 + trial, 25, rng);
    const int k = 12 + 3 * trial;
    const double s = slic_detail::grid_interval(f.width, f.height, k);
    auto centers = slic_detail::seed_centers(f, k);
    EXPECT_LE(static_cast<int>(centers.size()), k);
    const auto labels = slic_detail::assign(f, centers, 10.0, s);
    EXPECT_EQ(labels, oracle::brute_slic_assign(f, centers, 10.0, s));
  }
}

TEST(Slic, AssignmentNeverIncreasesDistance) {
  std::mt19937_64 rng(3);
  const ImageFrame f = sdf::testing::random_frame(36, 28, rng);
  const int k = 20;
  const double s = slic_detail::grid_interval(f.width, f.height, k);
  const auto centers = slic_detail::seed_centers(f, k);
  const auto labels = slic_detail::assign(f, centers, 10.0, s);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const int own = labels[static_cast<std::size_t>(y) * f.width + x];
      const double d = slic_detail::distance(centers[own], f, x, y, 10.0, s);
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (std::abs(x - centers[c].x) > s || std::abs(y - centers[c].y) > s) continue;
        EXPECT_LE(d, slic_detail::distance(centers[c], f, x, y, 10.0, s));
      }
    }
  }
}

TEST(Slic, SeedsMoveToLowerGradient) {
  ImageFrame f(9, 9);
  std::fill(f.data.begin(), f.data.end(), std::uint8_t{0});
  // Noise everywhere except (5,5), which becomes the flattest pixel near the centre (4,4).
  std::mt19937_64 rng(4);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(rng() % 256);
  for (int y = 4; y <= 6; ++y) {
    for (int x = 4; x <= 6; ++x) {
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = 100;
    }
  }
  for (int c = 0; c < 3; ++c) {
    f.at(5, 4, c) = f.at(4, 5, c) = f.at(6, 5, c) = f.at(5, 6, c) = 100;
  }
  const auto centers = slic_detail::seed_centers(f, 1);
  ASSERT_EQ(centers.size(), 1u);
  EXPECT_EQ(slic_detail::gradient_at(f, 5, 5), 0.0);
  EXPECT_DOUBLE_EQ(centers[0].x, 5.0);
  EXPECT_DOUBLE_EQ(centers[0].y, 5.0);
}

TEST(Slic, PartitionAndCentreMeans) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const ImageFrame f = sdf::testing::random_frame(48, 40, rng);
    const SuperpixelLabels sp = slic(f, {30, 10.0, 10});
    const int k = sp.k();
    std::vector<double> n(k), sx(k), sg(k);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 48; ++x) {
        const int id = sp(x, y);
        ASSERT_GE(id, 0);
        ASSERT_LT(id, k);
        n[id] += 1;
        sx[id] += x;
        sg[id] += f.at(x, y, 1);
      }
    }
    for (int id = 0; id < k; ++id) {
      ASSERT_GT(n[id], 0);
      EXPECT_NEAR(sp.centers[id].x, sx[id] / n[id], 1e-6);
      EXPECT_NEAR(sp.centers[id].g, sg[id] / n[id], 1e-6);
    }
  }
}

TEST(Slic, RejectsBadParameters) {
  ImageFrame f(4, 4);
  EXPECT_SDF_ERROR(slic(f, {17, 10.0, 10}), Errc::invalid_argument);
  EXPECT_SDF_ERROR(slic(f, {0, 10.0, 10}), Errc::invalid_argument);
  EXPECT_NO_THROW(slic(f, {16, 10.0, 1}));
}

TEST(Pooling, BlendZeroIsIdentity) {
  std::mt19937_64 rng(6);
  const ImageFrame f = sdf::testing::random_frame(20, 20, rng);
  const SuperpixelLabels sp = slic(f, {9, 10.0, 3});
  const ConfidenceMap c = sdf::testing::random_map(20, 20, rng);
  EXPECT_EQ(soft_mean_pool(c, sp, 0.0), c);
}

TEST(Pooling, FullBlendAveragesClusters) {
  SuperpixelLabels sp;
  sp.width = 2;
  sp.height = 1;
  sp.labels = {0, 0};
  sp.centers.resize(1);
  ConfidenceMap c(2, 1);
  c.data = {0.2, 0.4};
  const auto out = soft_mean_pool(c, sp, 1.0);
  EXPECT_NEAR(out.data[0], 0.3, 1e-15);
  EXPECT_NEAR(out.data[1], 0.3, 1e-15);
}

TEST(Pooling, ConstantUnchangedAndMeanPreservedWithinRange) {
  std::mt19937_64 rng(7);
  const ImageFrame f = sdf::testing::random_frame(33, 21, rng);
  const SuperpixelLabels sp = slic(f, {15, 10.0, 5});
  const ConfidenceMap k(33, 21, 0.42);
  for (double b : {0.0, 0.3, 1.0}) {
    for (double v : soft_mean_pool(k, sp, b).data) EXPECT_NEAR(v, 0.42, 1e-15);
  }
  const ConfidenceMap c = sdf::testing::random_map(33, 21, rng);
  const auto [lo, hi] = std::minmax_element(c.data.begin(), c.data.end());
  const auto out = soft_mean_pool(c, sp, 0.6);
  double s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    s0 += c.data[i];
    s1 += out.data[i];
    EXPECT_GE(out.data[i], *lo - 1e-15);
    EXPECT_LE(out.data[i], *hi + 1e-15);
  }
  EXPECT_NEAR(s0 / c.size(), s1 / c.size(), 1e-9);
  EXPECT_SDF_ERROR(soft_mean_pool(c, sp, 1.5), Errc::invalid_argument);
}
