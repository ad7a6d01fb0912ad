#include "sdforest/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "sdforest/error.hpp"
#include "sdforest/parallel.hpp"

namespace sdf {

namespace {

constexpr double kMinScoreGain = 1e-9;

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

struct SplitCandidate {
  bool found = false;
  int feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // sum_k cL_k^2 / nL + sum_k cR_k^2 / nR
};

class TreeBuilder {
 public:
  TreeBuilder(const PixelDataset& data, int num_classes, int max_depth, std::uint64_t seed, bool bootstrap)
      : data_(data), classes_(num_classes), max_depth_(max_depth), rng_(seed) {
    const std::size_t n = data.size();
    rows_.resize(n);
    if (bootstrap) {
      for (auto& r : rows_) r = static_cast<int>(uniform_index(rng_, n));
    } else {
      std::iota(rows_.begin(), rows_.end(), 0);
    }
    features_.resize(static_cast<std::size_t>(data.num_features));
    std::iota(features_.begin(), features_.end(), 0);
    candidates_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.num_features))));
    candidates_ = std::clamp(candidates_, 1, data.num_features);
    counts_.resize(classes_);
    left_counts_.resize(classes_);
    right_counts_.resize(classes_);
  }

  DecisionTree build() {
    DecisionTree tree;
    struct Work {
      int node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    tree.nodes.emplace_back();
    std::vector<Work> stack{{0, 0, rows_.size(), 0}};
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      tree.nodes[w.node].depth = w.depth;

      count_classes(w.begin, w.end, counts_);
      const std::size_t n = w.end - w.begin;
      const bool pure = std::count_if(counts_.begin(), counts_.end(), [](std::size_t c) { return c > 0; }) <= 1;
      SplitCandidate split;
      if (!pure && w.depth < max_depth_ && n >= 2) split = find_split(w.begin, w.end);
      if (!split.found) {
        auto& node = tree.nodes[w.node];
        node.frequencies.resize(classes_);
        for (int c = 0; c < classes_; ++c) node.frequencies[c] = static_cast<double>(counts_[c]) / n;
        continue;
      }

      const auto mid_it = std::partition(rows_.begin() + w.begin, rows_.begin() + w.end, [&](int r) {
        return static_cast<double>(data_.row(r)[split.feature]) <= split.threshold;
      });
      const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());
      const int left = static_cast<int>(tree.nodes.size());
      const int right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[w.node];
      node.rule = SplitRule{split.feature, split.threshold};
      node.left = left;
      node.right = right;
      stack.push_back({right, mid, w.end, w.depth + 1});
      stack.push_back({left, w.begin, mid, w.depth + 1});
    }
    return tree;
  }

 private:
  void count_classes(std::size_t begin, std::size_t end, std::vector<std::size_t>& counts) const {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[data_.labels[rows_[i]]];
  }

  SplitCandidate find_split(std::size_t begin, std::size_t end) {
    // Partial Fisher-Yates draw of the candidate features for this node.
    const int total = static_cast<int>(features_.size());
    for (int i = 0; i < candidates_; ++i) {
      const int j = i + static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(total - i)));
      std::swap(features_[i], features_[j]);
    }
    std::vector<int> chosen(features_.begin(), features_.begin() + candidates_);
    std::sort(chosen.begin(), chosen.end());

    const std::size_t n = end - begin;
    double parent_sumsq = 0.0;
    for (auto c : counts_) parent_sumsq += static_cast<double>(c) * c;
    const double parent_score = parent_sumsq / static_cast<double>(n);

    SplitCandidate best;
    best.score = parent_score + kMinScoreGain;
    values_.resize(n);
    for (int f : chosen) {
      for (std::size_t i = 0; i < n; ++i) {
        const int r = rows_[begin + i];
        values_[i] = {data_.row(r)[f], data_.labels[r]};
      }
      std::sort(values_.begin(), values_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (values_.front().first == values_.back().first) continue;

      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      right_counts_ = counts_;
      double left_sumsq = 0.0;
      double right_sumsq = parent_sumsq;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int c = values_[i].second;
        left_sumsq += 2.0 * static_cast<double>(left_counts_[c]) + 1.0;
        right_sumsq -= 2.0 * static_cast<double>(right_counts_[c]) - 1.0;
        ++left_counts_[c];
        --right_counts_[c];
        if (values_[i].first == values_[i + 1].first) continue;
        const double n_left = static_cast<double>(i + 1);
        const double n_right = static_cast<double>(n - i - 1);
        const double score = left_sumsq / n_left + right_sumsq / n_right;
        if (score > best.score) {
          best.found = true;
          best.feature = f;
          best.threshold = 0.5 * (static_cast<double>(values_[i].first) + static_cast<double>(values_[i + 1].first));
          best.score = score;
        }
      }
    }
    return best;
  }

  const PixelDataset& data_;
  int classes_;
  int max_depth_;
  std::mt19937_64 rng_;
  std::vector<int> rows_;
  std::vector<int> features_;
  int candidates_ = 1;
  std::vector<std::size_t> counts_, left_counts_, right_counts_;
  std::vector<std::pair<float, std::uint8_t>> values_;
};

// ---- serialization helpers ----

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_i32(std::string& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int32_t i32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return static_cast<std::int32_t>(v);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(Errc::payload_mismatch, "truncated forest model");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kForestMagic = "SDFFORST";

}  // namespace

const TreeNode& DecisionTree::leaf_for(const float* x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = static_cast<double>(x[node->rule.feature]) <= node->rule.threshold ? &nodes[node->left] : &nodes[node->right];
  }
  return *node;
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

ForestModel train_forest(const PixelDataset& data, const ForestConfig& config, int num_classes) {
  if (data.size() == 0) throw Error(Errc::degenerate_data, "cannot train a forest on an empty dataset");
  if (data.num_features < 1) throw Error(Errc::invalid_argument, "dataset has no feature columns");
  if (config.trees < 1) throw Error(Errc::invalid_argument, "forest needs at least one tree");
  if (config.max_depth < 0) throw Error(Errc::invalid_argument, "max_depth must be >= 0");

  const int inferred = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  if (num_classes <= 0) num_classes = inferred;
  if (num_classes < inferred) throw Error(Errc::invalid_argument, "label exceeds num_classes");

  ForestModel model;
  model.num_features = data.num_features;
  model.num_classes = num_classes;
  model.config = config;
  model.trees.resize(static_cast<std::size_t>(config.trees));

  parallel_for(model.trees.size(), config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      TreeBuilder builder(data, num_classes, config.max_depth, config.seed ^ static_cast<std::uint64_t>(t),
                          config.bootstrap);
      model.trees[t] = builder.build();
    }
  });
  return model;
}

std::vector<double> predict_sample(const ForestModel& model, const float* x) {
  std::vector<double> out(static_cast<std::size_t>(model.num_classes), 0.0);
  for (const auto& tree : model.trees) {
    const auto& leaf = tree.leaf_for(x);
    for (int c = 0; c < model.num_classes; ++c) out[c] += leaf.frequencies[c];
  }
  const double inv = 1.0 / static_cast<double>(model.trees.size());
  for (auto& v : out) v *= inv;
  return out;
}

namespace {

void check_channels(const ForestModel& model, const FeatureMap& features) {
  if (features.channels != model.num_features) {
    throw Error(Errc::shape_mismatch, "forest trained on " + std::to_string(model.num_features) +
                                          " channels, features have " + std::to_string(features.channels));
  }
}

template <typename Sink>
void for_each_pixel_prediction(const ForestModel& model, const FeatureMap& features, const SearchWindow& window,
                               Sink&& sink) {
  const std::size_t plane = features.plane_size();
  const int channels = features.channels;
  parallel_for(static_cast<std::size_t>(window.h), model.config.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<float> x(static_cast<std::size_t>(channels));
    for (std::size_t yy = begin; yy < end; ++yy) {
      const int y = window.y0 + static_cast<int>(yy);
      for (int xx = window.x0; xx < window.x1(); ++xx) {
        const std::size_t i = static_cast<std::size_t>(y) * features.width + xx;
        for (int c = 0; c < channels; ++c) x[c] = features.values[c * plane + i];
        sink(i, predict_sample(model, x.data()));
      }
    }
  });
}

}  // namespace

std::vector<ConfidenceMap> predict_forest(const ForestModel& model, const FeatureMap& features) {
  check_channels(model, features);
  std::vector<ConfidenceMap> out(static_cast<std::size_t>(model.num_classes),
                                 ConfidenceMap(features.width, features.height));
  const SearchWindow all{0, 0, features.width, features.height};
  for_each_pixel_prediction(model, features, all, [&](std::size_t i, const std::vector<double>& p) {
    for (int c = 0; c < model.num_classes; ++c) out[c].data[i] = p[c];
  });
  return out;
}

ConfidenceMap predict_forest_class(const ForestModel& model, const FeatureMap& features, const SearchWindow& window,
                                   int cls) {
  check_channels(model, features);
  ConfidenceMap out(features.width, features.height, 0.0);
  if (cls < 0 || cls >= model.num_classes) return out;
  const SearchWindow win = clip_window(window, features.width, features.height);
  if (win.empty()) return out;
  for_each_pixel_prediction(model, features, win,
                            [&](std::size_t i, const std::vector<double>& p) { out.data[i] = p[cls]; });
  return out;
}

double forest_accuracy(const ForestModel& model, const PixelDataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = predict_sample(model, data.row(i));
    const auto best = std::max_element(p.begin(), p.end()) - p.begin();
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string serialize_forest(const ForestModel& model) {
  std::string out(kForestMagic);
  put_i32(out, 1);
  put_i32(out, model.num_features);
  put_i32(out, model.num_classes);
  put_i32(out, model.config.trees);
  put_i32(out, model.config.max_depth);
  put_u64(out, model.config.seed);
  put_i32(out, model.config.bootstrap ? 1 : 0);
  put_i32(out, static_cast<std::int32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    put_i32(out, static_cast<std::int32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      put_i32(out, node.left);
      put_i32(out, node.right);
      put_i32(out, node.depth);
      if (node.is_leaf()) {
        for (double f : node.frequencies) put_f64(out, f);
      } else {
        put_i32(out, node.rule.feature);
        put_f64(out, node.rule.threshold);
      }
    }
  }
  return out;
}

ForestModel deserialize_forest(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kForestMagic.size()) != kForestMagic) throw Error(Errc::bad_magic, "not a serialized forest");
  if (in.i32() != 1) throw Error(Errc::unsupported_version, "forest model version");
  ForestModel model;
  model.num_features = in.i32();
  model.num_classes = in.i32();
  model.config.trees = in.i32();
  model.config.max_depth = in.i32();
  model.config.seed = in.u64();
  model.config.bootstrap = in.i32() != 0;
  const int trees = in.i32();
  if (trees < 1 || model.num_classes < 1 || model.num_features < 1) {
    throw Error(Errc::invalid_argument, "corrupt forest header");
  }
  model.trees.resize(static_cast<std::size_t>(trees));
  for (auto& tree : model.trees) {
    const int count = in.i32();
    if (count < 1) throw Error(Errc::invalid_argument, "corrupt tree");
    tree.nodes.resize(static_cast<std::size_t>(count));
    for (auto& node : tree.nodes) {
      node.left = in.i32();
      node.right = in.i32();
      node.depth = in.i32();
      if (node.is_leaf()) {
        node.frequencies.resize(static_cast<std::size_t>(model.num_classes));
        for (auto& f : node.frequencies) f = in.f64();
      } else {
        node.rule.feature = in.i32();
        node.rule.threshold = in.f64();
        if (node.left >= count || node.right >= count || node.rule.feature < 0 ||
            node.rule.feature >= model.num_features) {
          throw Error(Errc::invalid_argument, "corrupt tree node");
        }
      }
    }
  }
  if (!in.done()) throw Error(Errc::payload_mismatch, "trailing bytes after forest model");
  return model;
}

}  // namespace sdf
