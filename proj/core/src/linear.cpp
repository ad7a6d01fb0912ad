#include "sdforest/linear.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "sdforest/error.hpp"
#include "sdforest/parallel.hpp"

namespace sdf {

namespace {

constexpr std::size_t kReductionBlock = 2048;
constexpr int kHistory = 10;
constexpr double kArmijo = 1e-4;
constexpr double kStdFloor = 1e-8;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Logits for one row: z = W * standardise(x) + b.
void logits(const LinearModel& model, const float* x, std::vector<double>& xs, std::vector<double>& z) {
  const int d = model.num_features;
  for (int j = 0; j < d; ++j) xs[j] = (static_cast<double>(x[j]) - model.mean[j]) / model.scale[j];
  for (int k = 0; k < model.num_classes; ++k) {
    const double* w = model.weights.data() + static_cast<std::size_t>(k) * (d + 1);
    double acc = w[d];
    for (int j = 0; j < d; ++j) acc += w[j] * xs[j];
    z[k] = acc;
  }
}

// In-place softmax; returns log-sum-exp of the input.
double softmax(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return top + std::log(sum);
}

void check_model(const LinearModel& model) {
  if (model.num_classes < 1 || model.num_features < 0 ||
      model.weights.size() != static_cast<std::size_t>(model.num_classes) * (model.num_features + 1) ||
      model.mean.size() != static_cast<std::size_t>(model.num_features) ||
      model.scale.size() != static_cast<std::size_t>(model.num_features)) {
    throw Error(Errc::invalid_argument, "malformed linear model");
  }
}

}  // namespace

LinearModel LinearModel::zeros(int num_classes, int num_features) {
  LinearModel m;
  m.num_classes = num_classes;
  m.num_features = num_features;
  m.weights.assign(static_cast<std::size_t>(num_classes) * (num_features + 1), 0.0);
  m.mean.assign(static_cast<std::size_t>(num_features), 0.0);
  m.scale.assign(static_cast<std::size_t>(num_features), 1.0);
  return m;
}

LossGrad loss_and_grad(const LinearModel& model, const PixelDataset& data, double l2, int threads) {
  check_model(model);
  if (data.num_features != model.num_features) {
    throw Error(Errc::shape_mismatch, "dataset and model feature counts differ");
  }
  if (data.size() == 0) throw Error(Errc::degenerate_data, "empty dataset");
  const std::size_t n = data.size();
  const int d = model.num_features;
  const int c = model.num_classes;
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;

  std::vector<double> block_loss(blocks, 0.0);
  std::vector<std::vector<double>> block_grad(blocks);

  parallel_for(blocks, threads, [&](std::size_t b_begin, std::size_t b_end) {
    std::vector<double> xs(static_cast<std::size_t>(d)), z(static_cast<std::size_t>(c));
    for (std::size_t b = b_begin; b < b_end; ++b) {
      auto& grad = block_grad[b];
      grad.assign(model.weights.size(), 0.0);
      double loss = 0.0;
      const std::size_t end = std::min(n, (b + 1) * kReductionBlock);
      for (std::size_t i = b * kReductionBlock; i < end; ++i) {
        logits(model, data.row(i), xs, z);
        const int y = data.labels[i];
        if (y >= c) throw Error(Errc::invalid_argument, "label exceeds model class count");
        const double z_y = z[y];
        loss += softmax(z) - z_y;
        for (int k = 0; k < c; ++k) {
          const double r = z[k] - (k == y ? 1.0 : 0.0);
          double* g = grad.data() + static_cast<std::size_t>(k) * (d + 1);
          for (int j = 0; j < d; ++j) g[j] += r * xs[j];
          g[d] += r;
        }
      }
      block_loss[b] = loss;
    }
  });

  LossGrad out;
  out.grad.assign(model.weights.size(), 0.0);
  double loss = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    loss += block_loss[b];
    for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += block_grad[b][k];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = loss * inv_n + 0.5 * l2 * dot(model.weights, model.weights);
  for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] = out.grad[k] * inv_n + l2 * model.weights[k];
  return out;
}

LinearModel train_logistic(const PixelDataset& data, const LinearConfig& config, std::vector<double>* trace) {
  if (data.size() < 2) throw Error(Errc::degenerate_data, "logistic regression needs at least 2 rows");
  if (data.single_class()) throw Error(Errc::degenerate_data, "logistic regression needs at least 2 classes");
  if (config.l2 < 0.0 || config.tol < 0.0 || config.max_iters < 0) {
    throw Error(Errc::invalid_argument, "invalid logistic regression settings");
  }
  const int d = data.num_features;
  const int c = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  LinearModel model = LinearModel::zeros(c, d);

  const std::size_t n = data.size();
  for (int j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data.row(i)[j];
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = data.row(i)[j] - mean;
      var += dv * dv;
    }
    model.mean[j] = mean;
    model.scale[j] = std::max(std::sqrt(var / static_cast<double>(n)), kStdFloor);
  }

  auto evaluate = [&](const std::vector<double>& theta) {
    model.weights = theta;
    return loss_and_grad(model, data, config.l2, config.threads);
  };

  std::vector<double> theta(model.weights.size(), 0.0);
  LossGrad current = evaluate(theta);
  if (trace) trace->assign(1, current.loss);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  const std::size_t p = theta.size();

  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (inf_norm(current.grad) <= config.tol) break;

    // Two-loop recursion for d = -H g.
    std::vector<double> q = current.grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t h = s_hist.size(); h-- > 0;) {
      alpha[h] = rho_hist[h] * dot(s_hist[h], q);
      for (std::size_t k = 0; k < p; ++k) q[k] -= alpha[h] * y_hist[h][k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (auto& v : q) v *= gamma;
    for (std::size_t h = 0; h < s_hist.size(); ++h) {
      const double beta = rho_hist[h] * dot(y_hist[h], q);
      for (std::size_t k = 0; k < p; ++k) q[k] += (alpha[h] - beta) * s_hist[h][k];
    }
    std::vector<double> direction(p);
    for (std::size_t k = 0; k < p; ++k) direction[k] = -q[k];
    double slope = dot(current.grad, direction);
    if (!(slope < 0.0)) {
      for (std::size_t k = 0; k < p; ++k) direction[k] = -current.grad[k];
      slope = dot(current.grad, direction);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(current.grad, current.grad))) : 1.0;
    bool accepted = false;
    std::vector<double> candidate(p);
    LossGrad next;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t k = 0; k < p; ++k) candidate[k] = theta[k] + step * direction[k];
      next = evaluate(candidate);
      if (std::isfinite(next.loss) && next.loss <= current.loss + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(p), y(p);
    for (std::size_t k = 0; k < p; ++k) {
      s[k] = candidate[k] - theta[k];
      y[k] = next.grad[k] - current.grad[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = std::move(candidate);
    current = std::move(next);
    if (trace) trace->push_back(current.loss);
  }
  model.weights = theta;
  return model;
}

std::vector<double> predict_probabilities(const LinearModel& model, const float* x) {
  std::vector<double> xs(static_cast<std::size_t>(model.num_features));
  std::vector<double> z(static_cast<std::size_t>(model.num_classes));
  logits(model, x, xs, z);
  softmax(z);
  return z;
}

namespace {

template <typename Sink>
void for_each_prediction(const LinearModel& model, const FeatureMap& features, const SearchWindow& win, Sink&& sink) {
  check_model(model);
  if (features.channels != model.num_features) {
    throw Error(Errc::shape_mismatch, "linear model trained on " + std::to_string(model.num_features) +
                                          " channels, features have " + std::to_string(features.channels));
  }
  const std::size_t plane = features.plane_size();
  const int channels = features.channels;
  parallel_for(static_cast<std::size_t>(win.h), 0, [&](std::size_t begin, std::size_t end) {
    std::vector<float> x(static_cast<std::size_t>(channels));
    std::vector<double> xs(static_cast<std::size_t>(channels));
    std::vector<double> z(static_cast<std::size_t>(model.num_classes));
    for (std::size_t yy = begin; yy < end; ++yy) {
      const int y = win.y0 + static_cast<int>(yy);
      for (int xx = win.x0; xx < win.x1(); ++xx) {
        const std::size_t i = static_cast<std::size_t>(y) * features.width + xx;
        for (int ch = 0; ch < channels; ++ch) x[ch] = features.values[ch * plane + i];
        logits(model, x.data(), xs, z);
        softmax(z);
        sink(i, z);
      }
    }
  });
}

}  // namespace

std::vector<ConfidenceMap> predict_logistic(const LinearModel& model, const FeatureMap& features) {
  std::vector<ConfidenceMap> out(static_cast<std::size_t>(model.num_classes),
                                 ConfidenceMap(features.width, features.height));
  for_each_prediction(model, features, SearchWindow{0, 0, features.width, features.height},
                      [&](std::size_t i, const std::vector<double>& p) {
                        for (int k = 0; k < model.num_classes; ++k) out[k].data[i] = p[k];
                      });
  return out;
}

ConfidenceMap predict_logistic_class(const LinearModel& model, const FeatureMap& features, const SearchWindow& window,
                                     int cls) {
  ConfidenceMap out(features.width, features.height, 0.0);
  if (cls < 0 || cls >= model.num_classes) {
    check_model(model);
    return out;
  }
  const SearchWindow win = clip_window(window, features.width, features.height);
  if (win.empty()) return out;
  for_each_prediction(model, features, win, [&](std::size_t i, const std::vector<double>& p) { out.data[i] = p[cls]; });
  return out;
}

double logistic_accuracy(const LinearModel& model, const PixelDataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = predict_probabilities(model, data.row(i));
    if (std::max_element(p.begin(), p.end()) - p.begin() == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace sdf
