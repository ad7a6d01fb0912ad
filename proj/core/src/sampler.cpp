#include "sdforest/sampler.hpp"

#include <algorithm>
#include <bitset>

#include "sdforest/error.hpp"

namespace sdf {

int PixelDataset::distinct_classes() const {
  std::bitset<256> seen;
  for (auto l : labels) seen.set(l);
  return static_cast<int>(seen.count());
}

PixelDataset build_training_set(const FeatureMap& features, const LabelMask& mask,
                                const SearchWindow& window, int stride) {
  if (features.height != mask.height || features.width != mask.width) {
    throw Error(Errc::shape_mismatch, "features and mask extents differ");
  }
  if (stride < 1) throw Error(Errc::invalid_argument, "sampler stride must be >= 1");
  const SearchWindow win = clip_window(window, mask.width, mask.height);
  if (win.empty()) throw Error(Errc::invalid_argument, "search window does not intersect the frame");

  const int channels = features.channels;
  const std::size_t plane = features.plane_size();
  PixelDataset data;
  data.num_features = channels;

  auto push = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
    for (int c = 0; c < channels; ++c) data.features.push_back(features.values[c * plane + i]);
    data.labels.push_back(mask.labels[i]);
    data.positions.push_back({x, y});
  };

  const std::size_t strided = static_cast<std::size_t>((mask.width + stride - 1) / stride) *
                              static_cast<std::size_t>((mask.height + stride - 1) / stride);
  const std::size_t expected = static_cast<std::size_t>(win.w) * win.h + strided;
  data.features.reserve(expected * channels);
  data.labels.reserve(expected);
  data.positions.reserve(expected);

  for (int y = win.y0; y < win.y1(); ++y) {
    for (int x = win.x0; x < win.x1(); ++x) push(x, y);
  }
  for (int y = 0; y < mask.height; y += stride) {
    for (int x = 0; x < mask.width; x += stride) {
      if (!win.contains(x, y)) push(x, y);
    }
  }
  return data;
}

}  // namespace sdf
