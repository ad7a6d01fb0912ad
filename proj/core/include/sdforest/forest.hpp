#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sdforest/sampler.hpp"
#include "sdforest/types.hpp"

namespace sdf {

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

struct ForestConfig {
  int trees = 20;
  int max_depth = 20;
  std::uint64_t seed = 0;
  /// Each tree draws N rows with replacement; disable to train every tree on all rows.
  bool bootstrap = true;
  /// Worker threads for training and prediction; <= 0 uses SDFOREST_THREADS.
  /// Not part of the model: results are identical for every value.
  int threads = 0;
};

/// Sends x to the left child when x[feature] <= threshold.
struct SplitRule {
  int feature = 0;
  double threshold = 0.0;
};

struct TreeNode {
  SplitRule rule;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::vector<double> frequencies;  // leaves only; sums to 1

  bool is_leaf() const noexcept { return left < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const float* x) const;
  int depth() const;
  std::size_t leaf_count() const;
};

struct ForestModel {
  int num_features = 0;
  int num_classes = 0;
  ForestConfig config;
  std::vector<DecisionTree> trees;
};

/// CART forest: bootstrap rows, ceil(sqrt(C)) candidate features per node,
/// best Gini decrease over midpoints of consecutive distinct values.
/// Ties prefer the lower feature index, then the lower threshold.
/// `num_classes` <= 0 infers max label + 1.
ForestModel train_forest(const PixelDataset& data, const ForestConfig& config, int num_classes = 0);

/// Mean over trees of the reached leaf's class frequencies.
std::vector<double> predict_sample(const ForestModel& model, const float* x);

/// Per-class confidence for every pixel.
std::vector<ConfidenceMap> predict_forest(const ForestModel& model, const FeatureMap& features);

/// Confidence of one class inside `window`; pixels outside it are 0.
ConfidenceMap predict_forest_class(const ForestModel& model, const FeatureMap& features,
                                   const SearchWindow& window, int cls);

/// Fraction of rows whose argmax prediction equals the label.
double forest_accuracy(const ForestModel& model, const PixelDataset& data);

std::string serialize_forest(const ForestModel& model);
ForestModel deserialize_forest(std::string_view bytes);

}  // namespace sdf
