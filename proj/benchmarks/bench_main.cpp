#include <random>

#include <benchmark/benchmark.h>

#include "sdforest/features.hpp"
#include "sdforest/forest.hpp"
#include "sdforest/guided_filter.hpp"
#include "sdforest/pipeline.hpp"
#include "sdforest/sampler.hpp"
#include "sdforest/superpixel.hpp"
#include "sdforest/tracker.hpp"
#include "synthetic.hpp"

namespace {

using namespace sdf;

const testing::DiskSequence& disk() {
  static const testing::DiskSequence seq = [] {
    testing::DiskParams p;
    p.frames = 2;
    return testing::moving_disk(p);
  }();
  return seq;
}

const FeatureMap& disk_features() {
  static const FeatureMap f = handcrafted_features(disk().frames[0]);
  return f;
}

void BM_BoxFilter(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const ConfidenceMap map = testing::random_map(256, 256, rng);
  for (auto _ : state) benchmark::DoNotOptimize(box_filter(map, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BoxFilter)->Arg(2)->Arg(8)->Arg(32);

void BM_GuidedFilter(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const ConfidenceMap guide = grayscale(disk().frames[0]);
  const ConfidenceMap conf = testing::random_map(guide.width, guide.height, rng);
  for (auto _ : state) benchmark::DoNotOptimize(guided_filter(guide, conf, {8, 1e-3}));
}
BENCHMARK(BM_GuidedFilter);

void BM_Slic(benchmark::State& state) {
  SlicParams params;
  params.k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(slic(disk().frames[0], params));
}
BENCHMARK(BM_Slic)->Arg(100)->Arg(400);

void BM_ForestTrain(benchmark::State& state) {
  const PixelDataset data = build_training_set(disk_features(), disk().masks[0], {0, 0, 256, 256}, 4);
  ForestConfig cfg;
  cfg.trees = static_cast<int>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(data, cfg));
}
BENCHMARK(BM_ForestTrain)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const PixelDataset data = build_training_set(disk_features(), disk().masks[0], {0, 0, 256, 256}, 4);
  ForestConfig cfg;
  cfg.trees = 50;
  cfg.threads = 1;
  const ForestModel model = train_forest(data, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(predict_forest(model, disk_features()));
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMillisecond);

void BM_CrossCorrelate(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int e = static_cast<int>(state.range(0));
  const FeatureMap exemplar = testing::random_features(11, e, e, rng);
  const FeatureMap region = testing::random_features(11, 2 * e, 2 * e, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cross_correlate(exemplar, region));
}
BENCHMARK(BM_CrossCorrelate)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SegmentFrame(benchmark::State& state) {
  PipelineConfig cfg;
  cfg.threads = 1;
  const auto models = fit_first_frame(disk_features(), disk().masks[0], nullptr, cfg, 7);
  const FeatureMap next = handcrafted_features(disk().frames[1]);
  const std::vector<SearchWindow> windows = {{0, 0, 256, 256}};
  for (auto _ : state) benchmark::DoNotOptimize(segment_frame(models, disk().frames[1], next, windows, cfg));
}
BENCHMARK(BM_SegmentFrame)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
