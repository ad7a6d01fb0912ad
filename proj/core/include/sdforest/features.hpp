#pragma once

#include <filesystem>
#include <span>

#include "sdforest/types.hpp"

namespace sdf {

/// Channel layout of handcrafted_features().
enum HandcraftedChannel : int {
  kChannelRed = 0,
  kChannelGreen,
  kChannelBlue,
  kChannelGray,
  kChannelGradX,
  kChannelGradY,
  kChannelBlur1,
  kChannelBlur2,
  kChannelBlur4,
  kChannelCoordX,
  kChannelCoordY,
  kHandcraftedChannels,
};

/// BT.601 luma scaled to [0,1].
ConfidenceMap grayscale(const ImageFrame& frame);

/// Deterministic 11-channel descriptor used when no exported deep features
/// exist: RGB, gray, |d/dx|, |d/dy| (replicated-border central differences,
/// |g[x+1]-g[x-1]| so the range stays [0,1]), gray blurred at sigma 1/2/4,
/// and normalised pixel coordinates.
FeatureMap handcrafted_features(const ImageFrame& frame);

/// Separable Gaussian blur with radius ceil(3 sigma) and replicated borders.
ConfidenceMap gaussian_blur(const ConfidenceMap& input, double sigma);

/// Half-pixel bilinear resampling; source coordinate is
/// (dst + 0.5) * src/dst - 0.5, clamped to the source extent.
FeatureMap bilinear_upsample(const FeatureMap& map, int target_h, int target_w);

FeatureMap concat_features(std::span<const FeatureMap> maps);

/// Reads a [C,h,w] tensor and resamples it to frame resolution if needed.
FeatureMap load_external_features(const std::filesystem::path& path, int frame_h, int frame_w);

}  // namespace sdf
