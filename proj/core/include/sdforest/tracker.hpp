#pragma once

#include <utility>

#include "sdforest/types.hpp"

namespace sdf {

using ResponseMap = Grid<double>;

struct TrackerState {
  FeatureMap exemplar;          // features inside exemplar_box
  SearchWindow exemplar_box;    // in the frame the exemplar was cut from
  SearchWindow window;          // last search window
  FeatureMap previous_features; // frame the next exemplar refresh reads from
  int frame_index = 0;
  double scale = 2.0;
};

/// Exemplar = features inside the object's bounding box; window = that box
/// scaled by `scale` about its centre and clipped.
TrackerState init_tracker(const FeatureMap& frame_features, const LabelMask& prompt_mask, int object_id,
                          double scale = 2.0);

/// Zero-normalised cross-correlation over all channels jointly: each channel
/// is centred on its own mean, scores are divided by the product of the joint
/// norms, and a norm below 1e-12 yields 0. Output extents are
/// region - exemplar + 1 per axis.
ResponseMap cross_correlate(const FeatureMap& exemplar, const FeatureMap& region);

/// Features inside `box` (must lie in the map).
FeatureMap crop_features(const FeatureMap& map, const SearchWindow& box);

/// Localises the object in `frame_features` and returns the next search
/// window. `predicted_mask_prev` is the binary prediction for the previous
/// frame; when non-empty it refreshes the exemplar (from the previous frame)
/// and sets the window size to its scaled bounding box.
std::pair<TrackerState, SearchWindow> track_step(TrackerState state, const FeatureMap& frame_features,
                                                 const LabelMask& predicted_mask_prev);

}  // namespace sdf
