#include "sdforest/pipeline.hpp"

#include <chrono>

#include "sdforest/error.hpp"
#include "sdforest/features.hpp"
#include "sdforest/sampler.hpp"

namespace sdf {

namespace {

constexpr double kConstantLogit = 15.0;

class StageClock {
 public:
  explicit StageClock(double* sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    if (sink_) {
      *sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
  }
  StageClock(const StageClock&) = delete;
  StageClock& operator=(const StageClock&) = delete;

 private:
  double* sink_;
  std::chrono::steady_clock::time_point start_;
};

double* field(StageTimings* t, double StageTimings::*member) { return t ? &(t->*member) : nullptr; }

void validate(const PipelineConfig& config) {
  if (config.forest_weight < 0.0 || config.forest_weight > 1.0) {
    throw Error(Errc::invalid_argument, "ensemble.forest_weight must lie in [0,1]");
  }
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw Error(Errc::invalid_argument, "threshold must lie in (0,1)");
  }
  if (!(config.tracker_scale > 0.0)) throw Error(Errc::invalid_argument, "tracker.scale must be positive");
}

// Model pair for a one-class dataset: predicts that class everywhere.
LinearModel constant_linear(int num_features, int present_class) {
  LinearModel m = LinearModel::zeros(2, num_features);
  m.bias(present_class) = kConstantLogit;
  m.bias(1 - present_class) = -kConstantLogit;
  return m;
}

}  // namespace

SearchWindow default_training_window(const LabelMask& prompt, int object_id, double scale) {
  const SearchWindow box = bounding_box(prompt, object_id);
  if (box.empty()) throw Error(Errc::degenerate_data, "object " + std::to_string(object_id) + " has no pixels");
  return scale_window(box, scale, prompt.width, prompt.height);
}

std::vector<SDForestModel> fit_first_frame(const FeatureMap& features, const LabelMask& prompt,
                                           const std::vector<SearchWindow>* windows, const PipelineConfig& config,
                                           std::uint64_t seed) {
  validate(config);
  if (features.width != prompt.width || features.height != prompt.height) {
    throw Error(Errc::shape_mismatch, "features and prompt mask extents differ");
  }
  const int objects = prompt.num_objects();
  if (objects < 1) throw Error(Errc::degenerate_data, "prompt mask contains no object");
  if (windows && static_cast<int>(windows->size()) != objects) {
    throw Error(Errc::invalid_argument, "need one training window per object");
  }

  std::vector<SDForestModel> models;
  models.reserve(static_cast<std::size_t>(objects));
  for (int id = 1; id <= objects; ++id) {
    const SearchWindow window =
        windows ? (*windows)[static_cast<std::size_t>(id - 1)] : default_training_window(prompt, id, config.tracker_scale);
    if (bounding_box(prompt, id).empty()) {
      throw Error(Errc::degenerate_data, "object " + std::to_string(id) + " has no pixels");
    }
    const PixelDataset data = build_training_set(features, prompt.binary(id), window, config.sampler_stride);

    SDForestModel model;
    model.object_id = id;
    model.forest_weight = config.forest_weight;
    ForestConfig forest_config = config.forest;
    forest_config.seed = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(id));
    if (forest_config.threads <= 0) forest_config.threads = config.threads;
    model.forest = train_forest(data, forest_config, 2);

    if (data.single_class()) {
      model.linear = constant_linear(data.num_features, data.labels.front());
    } else {
      LinearConfig linear_config = config.linear;
      if (linear_config.threads <= 0) linear_config.threads = config.threads;
      model.linear = train_logistic(data, linear_config);
    }
    models.push_back(std::move(model));
  }
  return models;
}

ConfidenceMap predict_confidence(const SDForestModel& model, const FeatureMap& features, const SearchWindow& window) {
  const ConfidenceMap forest = predict_forest_class(model.forest, features, window, 1);
  if (model.forest_weight >= 1.0) return forest;
  const ConfidenceMap linear = predict_logistic_class(model.linear, features, window, 1);
  if (model.forest_weight <= 0.0) return linear;
  ConfidenceMap out(features.width, features.height);
  const double g = model.forest_weight;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = g * forest.data[i] + (1.0 - g) * linear.data[i];
  return out;
}

ConfidenceMap predict_confidence(const SDForestModel& model, const FeatureMap& features) {
  return predict_confidence(model, features, SearchWindow{0, 0, features.width, features.height});
}

LabelMask assign_labels(const std::vector<ConfidenceMap>& confidences, const std::vector<int>& object_ids,
                        double threshold) {
  if (confidences.size() != object_ids.size()) {
    throw Error(Errc::invalid_argument, "one object id per confidence map required");
  }
  if (confidences.empty()) return LabelMask{};
  const int w = confidences.front().width, h = confidences.front().height;
  LabelMask mask(w, h);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    double best = -1.0;
    int label = 0;
    for (std::size_t o = 0; o < confidences.size(); ++o) {
      if (confidences[o].data[i] > best) {
        best = confidences[o].data[i];
        label = object_ids[o];
      }
    }
    mask.labels[i] = best >= threshold ? static_cast<std::uint8_t>(label) : 0;
  }
  return mask;
}

FrameSegmentation segment_frame(const std::vector<SDForestModel>& models, const ImageFrame& frame,
                                const FeatureMap& features, const std::vector<SearchWindow>& windows,
                                const PipelineConfig& config, StageTimings* timings) {
  validate(config);
  if (windows.size() != models.size()) throw Error(Errc::invalid_argument, "one window per object required");
  if (features.width != frame.width || features.height != frame.height) {
    throw Error(Errc::shape_mismatch, "features and frame extents differ");
  }
  FrameSegmentation out;
  if (models.empty()) {
    out.mask = LabelMask(frame.width, frame.height);
    return out;
  }

  std::vector<ConfidenceMap> raw;
  {
    StageClock clock(field(timings, &StageTimings::confidence_ms));
    for (std::size_t o = 0; o < models.size(); ++o) raw.push_back(predict_confidence(models[o], features, windows[o]));
  }
  std::vector<ConfidenceMap> pooled;
  {
    StageClock clock(field(timings, &StageTimings::superpixel_ms));
    const SuperpixelLabels superpixels = slic(frame, config.slic);
    for (const auto& c : raw) pooled.push_back(soft_mean_pool(c, superpixels, config.pooling_blend));
  }
  {
    StageClock clock(field(timings, &StageTimings::filter_ms));
    const ConfidenceMap guidance = grayscale(frame);
    for (const auto& c : pooled) out.confidences.push_back(guided_filter(guidance, c, config.igf));
  }
  {
    StageClock clock(field(timings, &StageTimings::threshold_ms));
    std::vector<int> ids;
    for (const auto& m : models) ids.push_back(m.object_id);
    out.mask = assign_labels(out.confidences, ids, config.threshold);
  }
  return out;
}

SequenceResult run_sequence(const std::vector<ImageFrame>& frames, const LabelMask& prompt,
                            const PipelineConfig& config, std::uint64_t seed, const FeatureProvider& provider) {
  validate(config);
  if (frames.empty()) throw Error(Errc::invalid_argument, "sequence has no frames");
  const int width = frames.front().width, height = frames.front().height;
  if (prompt.width != width || prompt.height != height) {
    throw Error(Errc::shape_mismatch, "prompt mask extents differ from the first frame");
  }
  const FeatureProvider features_of =
      provider ? provider : FeatureProvider([](std::size_t, const ImageFrame& f) { return handcrafted_features(f); });

  SequenceResult result;
  StageTimings& t = result.timings;

  auto load = [&](std::size_t n) {
    StageClock clock(&t.features_ms);
    FeatureMap f = features_of(n, frames[n]);
    if (f.width != width || f.height != height) {
      throw Error(Errc::shape_mismatch, "frame " + std::to_string(n) + ": features do not match frame extents");
    }
    return f;
  };

  const FeatureMap first = load(0);
  std::vector<SDForestModel> models;
  std::vector<TrackerState> trackers;
  {
    StageClock clock(&t.fit_ms);
    models = fit_first_frame(first, prompt, nullptr, config, seed);
  }
  {
    StageClock clock(&t.tracking_ms);
    for (const auto& m : models) trackers.push_back(init_tracker(first, prompt, m.object_id, config.tracker_scale));
  }
  result.masks.push_back(prompt);
  if (config.keep_confidence) {
    std::vector<ConfidenceMap> maps;
    for (const auto& m : models) {
      ConfidenceMap c(width, height);
      for (std::size_t i = 0; i < c.size(); ++i) c.data[i] = prompt.labels[i] == m.object_id ? 1.0 : 0.0;
      maps.push_back(std::move(c));
    }
    result.confidences.push_back(std::move(maps));
  }

  for (std::size_t n = 1; n < frames.size(); ++n) {
    if (frames[n].width != width || frames[n].height != height) {
      throw Error(Errc::shape_mismatch, "frame " + std::to_string(n) + " changes the frame size");
    }
    const FeatureMap features = load(n);
    if (features.channels != first.channels) {
      throw Error(Errc::shape_mismatch, "frame " + std::to_string(n) + ": expected " + std::to_string(first.channels) +
                                            " feature channels, got " + std::to_string(features.channels));
    }
    const LabelMask& previous = result.masks.back();
    std::vector<SearchWindow> windows;
    {
      StageClock clock(&t.tracking_ms);
      for (std::size_t o = 0; o < models.size(); ++o) {
        auto [state, window] = track_step(std::move(trackers[o]), features, previous.binary(models[o].object_id));
        trackers[o] = std::move(state);
        windows.push_back(window);
      }
    }
    FrameSegmentation seg = segment_frame(models, frames[n], features, windows, config, &t);
    result.masks.push_back(std::move(seg.mask));
    if (config.keep_confidence) result.confidences.push_back(std::move(seg.confidences));
  }
  t.frames = frames.size();
  return result;
}

}  // namespace sdf
