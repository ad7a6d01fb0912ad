#pragma once

#include <vector>

#include "sdforest/sampler.hpp"
#include "sdforest/types.hpp"

namespace sdf {

struct LinearConfig {
  double l2 = 1e-4;
  int max_iters = 200;
  double tol = 1e-6;
  int threads = 0;
};

/// Softmax regression on standardised features. weights is row-major
/// num_classes x (num_features + 1); the last column is the bias.
struct LinearModel {
  int num_classes = 0;
  int num_features = 0;
  std::vector<double> weights;
  std::vector<double> mean;   // per feature
  std::vector<double> scale;  // per feature, std floored at 1e-8

  double& weight(int cls, int feature) { return weights[static_cast<std::size_t>(cls) * (num_features + 1) + feature]; }
  double weight(int cls, int feature) const { return weights[static_cast<std::size_t>(cls) * (num_features + 1) + feature]; }
  double& bias(int cls) { return weight(cls, num_features); }
  double bias(int cls) const { return weight(cls, num_features); }

  /// Zero weights with identity standardisation.
  static LinearModel zeros(int num_classes, int num_features);
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as LinearModel::weights
};

/// Mean softmax cross-entropy of `model` on `data` plus (l2/2)|theta|^2,
/// with its exact gradient with respect to the weights.
LossGrad loss_and_grad(const LinearModel& model, const PixelDataset& data, double l2 = 0.0, int threads = 0);

/// Standardises, then runs L-BFGS from theta = 0 until the gradient
/// infinity-norm is <= tol or max_iters is reached. When `trace` is given it
/// receives the objective after every accepted iteration (starting at theta=0).
LinearModel train_logistic(const PixelDataset& data, const LinearConfig& config,
                           std::vector<double>* trace = nullptr);

/// Class probabilities for one raw (unstandardised) feature vector.
std::vector<double> predict_probabilities(const LinearModel& model, const float* x);

std::vector<ConfidenceMap> predict_logistic(const LinearModel& model, const FeatureMap& features);

/// Probability of one class inside `window`; 0 outside.
ConfidenceMap predict_logistic_class(const LinearModel& model, const FeatureMap& features,
                                     const SearchWindow& window, int cls);

double logistic_accuracy(const LinearModel& model, const PixelDataset& data);

}  // namespace sdf
