#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdforest/types.hpp"

namespace sdf {

/// Region similarity |pred & gt| / |pred | gt| over nonzero pixels.
/// Both empty -> 1; exactly one empty -> 0.
double jaccard(const LabelMask& pred, const LabelMask& gt);

/// Foreground pixels with a 4-neighbour (inside the frame) in the background.
LabelMask boundary_map(const LabelMask& mask);

/// Boundary F-measure; a boundary pixel matches when a boundary pixel of the
/// other mask lies within Chebyshev distance `tolerance`.
double boundary_f(const LabelMask& pred, const LabelMask& gt, int tolerance);

/// ceil(0.008 * frame diagonal).
int default_boundary_tolerance(int width, int height);

struct SeriesStats {
  double mean = 0.0;
  double recall = 0.0;  // fraction of values > 0.5
  double decay = 0.0;   // mean(first quarter) - mean(last quarter)
};

/// Statistics over per-frame values (the prompt frame already excluded).
SeriesStats sequence_stats(std::span<const double> values);

struct ObjectMetrics {
  int object_id = 0;
  SeriesStats j;
  SeriesStats f;
  std::vector<double> j_series;
  std::vector<double> f_series;
};

struct SequenceMetrics {
  std::string name;
  std::size_t frames = 0;
  std::vector<ObjectMetrics> objects;
  SeriesStats j;  // averaged over objects
  SeriesStats f;
};

struct MetricsReport {
  std::vector<SequenceMetrics> sequences;
  SeriesStats j;  // averaged over sequences
  SeriesStats f;
  std::optional<double> frames_per_second;
};

/// Scores one sequence of predicted vs ground-truth label masks; frame 0 is
/// the prompt and is skipped. Objects are the ids 1..max gt label.
SequenceMetrics evaluate_sequence(const std::string& name, const std::vector<LabelMask>& pred,
                                  const std::vector<LabelMask>& gt, std::optional<int> tolerance = std::nullopt);

/// `gt_dir` holds either PNG masks (one sequence) or one sub-directory of
/// masks per sequence; `pred_dir` mirrors it with identical file names.
/// A `timing.txt` with a frames_per_second line in a prediction directory is
/// picked up as the speed figure.
MetricsReport evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                       std::optional<int> tolerance = std::nullopt);

/// Plain "key: value" lines.
std::string report_text(const MetricsReport& report);
/// Structured JSON rendering.
std::string report_json(const MetricsReport& report);

}  // namespace sdf
