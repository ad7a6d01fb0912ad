#pragma once

#include <vector>

#include "sdforest/types.hpp"

namespace sdf {

struct SlicParams {
  int k = 400;
  double compactness = 10.0;
  int iters = 10;
};

struct SuperpixelCenter {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;  // colour on the 0..255 scale
  double g = 0.0;
  double b = 0.0;
};

struct SuperpixelLabels {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major, ids in [0, k)
  std::vector<SuperpixelCenter> centers;

  int k() const noexcept { return static_cast<int>(centers.size()); }
  int operator()(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// SLIC in RGB. Empty clusters are dropped after the final update and the
/// remaining ids are compacted, so k() may be below the requested count.
SuperpixelLabels slic(const ImageFrame& frame, const SlicParams& params);

/// out[i] = (1 - blend) * conf[i] + blend * (mean of conf over i's superpixel).
ConfidenceMap soft_mean_pool(const ConfidenceMap& conf, const SuperpixelLabels& labels, double blend);

namespace slic_detail {

/// Grid interval S = sqrt(H*W/k).
double grid_interval(int width, int height, int k);

/// Seeds on a uniform grid of at most k cells, each moved to the
/// lowest-gradient pixel of its 3x3 neighbourhood.
std::vector<SuperpixelCenter> seed_centers(const ImageFrame& frame, int k);

/// Squared colour difference of horizontal plus vertical neighbours.
double gradient_at(const ImageFrame& frame, int x, int y);

/// D = sqrt(dc^2 + (m/S)^2 * dxy^2).
double distance(const SuperpixelCenter& c, const ImageFrame& frame, int x, int y, double compactness,
                double interval);

/// One assignment pass: each centre claims pixels within +-S of it; ties go to
/// the lowest id; unclaimed pixels join the spatially nearest centre.
std::vector<int> assign(const ImageFrame& frame, const std::vector<SuperpixelCenter>& centers, double compactness,
                        double interval);

}  // namespace slic_detail

}  // namespace sdf
