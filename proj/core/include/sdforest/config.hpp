#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sdforest/pipeline.hpp"

namespace sdf {

/// Everything `segment` needs besides paths. Keys (with defaults):
///   seed = 0
///   sampler.stride = 10
///   forest.trees = 20, forest.max_depth = 20, forest.bootstrap = true
///   linear.l2 = 1e-4, linear.tol = 1e-6, linear.max_iters = 200
///   ensemble.forest_weight = 0.8
///   threshold = 0.5
///   tracker.scale = 2.0
///   slic.k = 400, slic.compactness = 10, slic.iters = 10
///   pooling.blend = 0.5
///   igf.radius = 8, igf.eps = 1e-3
struct RunConfig {
  PipelineConfig pipeline;
  std::uint64_t seed = 0;

  /// Applies one key; unknown keys and unparsable values throw.
  void set(const std::string& key, const std::string& value);
  /// key = value lines; '#' starts a comment; blank lines ignored.
  void merge_text(const std::string& text, const std::string& origin = "<config>");
  void merge_file(const std::filesystem::path& path);
  /// Canonical key = value rendering of every setting.
  std::string to_text() const;

  static const std::vector<std::string>& keys();
};

}  // namespace sdf
