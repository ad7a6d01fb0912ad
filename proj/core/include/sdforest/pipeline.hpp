#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sdforest/forest.hpp"
#include "sdforest/guided_filter.hpp"
#include "sdforest/linear.hpp"
#include "sdforest/superpixel.hpp"
#include "sdforest/tracker.hpp"
#include "sdforest/types.hpp"

namespace sdf {

struct PipelineConfig {
  int sampler_stride = 10;
  ForestConfig forest;
  LinearConfig linear;
  double forest_weight = 0.8;
  double threshold = 0.5;
  double tracker_scale = 2.0;
  SlicParams slic;
  double pooling_blend = 0.5;
  GuidedFilterParams igf;
  /// Keep per-object confidence maps in SequenceResult.
  bool keep_confidence = false;
  int threads = 0;
};

/// One-vs-rest semi-parametric estimator for a single object.
struct SDForestModel {
  ForestModel forest;
  LinearModel linear;
  double forest_weight = 0.8;
  int object_id = 1;
};

struct StageTimings {
  double features_ms = 0.0;
  double fit_ms = 0.0;
  double tracking_ms = 0.0;
  double confidence_ms = 0.0;
  double superpixel_ms = 0.0;
  double filter_ms = 0.0;
  double threshold_ms = 0.0;
  std::size_t frames = 0;

  double total_ms() const noexcept {
    return features_ms + fit_ms + tracking_ms + confidence_ms + superpixel_ms + filter_ms + threshold_ms;
  }
  double frames_per_second() const noexcept {
    const double t = total_ms();
    return t > 0.0 ? 1000.0 * static_cast<double>(frames) / t : 0.0;
  }
};

struct SequenceResult {
  std::vector<LabelMask> masks;
  /// confidences[frame][object]; filled only when keep_confidence is set.
  std::vector<std::vector<ConfidenceMap>> confidences;
  StageTimings timings;
};

struct FrameSegmentation {
  LabelMask mask;
  std::vector<ConfidenceMap> confidences;  // one per model, after filtering
};

/// Supplies h(I) for frame `index`; the default computes handcrafted features.
using FeatureProvider = std::function<FeatureMap(std::size_t index, const ImageFrame& frame)>;

/// Window used for training when none is supplied: the object's bounding box
/// scaled by tracker_scale.
SearchWindow default_training_window(const LabelMask& prompt, int object_id, double scale);

/// Trains one model pair per object id 1..num_objects. `windows`, when given,
/// holds one training window per object.
std::vector<SDForestModel> fit_first_frame(const FeatureMap& features, const LabelMask& prompt,
                                           const std::vector<SearchWindow>* windows, const PipelineConfig& config,
                                           std::uint64_t seed);

/// forest_weight * forest + (1 - forest_weight) * linear for the positive
/// class, evaluated inside `window` (0 outside).
ConfidenceMap predict_confidence(const SDForestModel& model, const FeatureMap& features,
                                 const SearchWindow& window);
ConfidenceMap predict_confidence(const SDForestModel& model, const FeatureMap& features);

/// Picks label argmax_o Q_o where the maximum reaches `threshold`, else 0.
/// Ties go to the earlier model.
LabelMask assign_labels(const std::vector<ConfidenceMap>& confidences, const std::vector<int>& object_ids,
                        double threshold);

/// Confidence -> superpixel pooling -> guided filter -> threshold/assignment.
FrameSegmentation segment_frame(const std::vector<SDForestModel>& models, const ImageFrame& frame,
                                const FeatureMap& features, const std::vector<SearchWindow>& windows,
                                const PipelineConfig& config, StageTimings* timings = nullptr);

SequenceResult run_sequence(const std::vector<ImageFrame>& frames, const LabelMask& prompt,
                            const PipelineConfig& config, std::uint64_t seed,
                            const FeatureProvider& features = {});

}  // namespace sdf
