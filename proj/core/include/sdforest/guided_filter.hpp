#pragma once

#include "sdforest/types.hpp"

namespace sdf {

struct GuidedFilterParams {
  int radius = 8;
  /// Regulariser on the per-window slope, in variance units: the window
  /// energy sum_i (a I_i + b - P_i)^2 + |w| * eps * a^2 is minimised.
  double eps = 1e-3;
};

/// Mean over the (2r+1)^2 window clipped to the frame (valid-pixel count),
/// computed from a summed-area table.
ConfidenceMap box_filter(const ConfidenceMap& map, int radius);

/// Guided filter without the final clamp: a_k = cov_k(I,P) / (var_k(I) + eps),
/// b_k = mean_k(P) - a_k mean_k(I), Q = box(a) * I + box(b).
ConfidenceMap guided_filter_raw(const ConfidenceMap& guidance, const ConfidenceMap& conf,
                                const GuidedFilterParams& params);

/// guided_filter_raw clamped to [0,1].
ConfidenceMap guided_filter(const ConfidenceMap& guidance, const ConfidenceMap& conf,
                            const GuidedFilterParams& params);

/// 1 where conf >= threshold, else 0.
LabelMask threshold_mask(const ConfidenceMap& conf, double threshold);

}  // namespace sdf
