#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sdforest/types.hpp"

namespace sdf {

/// First-frame training pixels: features are N x C row-major.
struct PixelDataset {
  int num_features = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;
  std::vector<std::array<int, 2>> positions;  // (x, y)

  std::size_t size() const noexcept { return labels.size(); }
  const float* row(std::size_t i) const noexcept { return features.data() + i * num_features; }
  /// Number of distinct label values present.
  int distinct_classes() const;
  /// True when every row carries the same label; models trained on it degenerate.
  bool single_class() const { return distinct_classes() < 2; }
};

/// Every pixel inside `window` (row-major), then every pixel outside it whose
/// x and y are multiples of `stride` (row-major). Labels come from the mask.
PixelDataset build_training_set(const FeatureMap& features, const LabelMask& mask,
                                const SearchWindow& window, int stride);

}  // namespace sdf
