#include <benchmark/benchmark.h>

#include <memory>

#include "lpcn/scheduling.hpp"
#include "lpcn/synth.hpp"

namespace {

// 1024 points, 512 subsets of 32, islands of 32; arg selects the reuse mode.
void BM_Pipeline(benchmark::State& state) {
  lpcn::CloudSpec spec;
  spec.kind = lpcn::CloudKind::kSphereSurface;
  spec.n = 1024;
  const auto cloud = std::make_shared<const lpcn::PointCloud>(lpcn::generate(spec));
  lpcn::ModelSpec model_spec;
  model_spec.layers = {{6, 64, lpcn::Activation::kRelu},
                       {64, 64, lpcn::Activation::kRelu},
                       {64, 128, lpcn::Activation::kRelu}};
  const auto model = lpcn::MlpModel::random(model_spec);
  lpcn::RunConfig config;
  config.reuse_mode = static_cast<lpcn::ReuseMode>(state.range(0));
  config.parallel_islands = state.range(1) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpcn::run_pipeline(cloud, config, model));
  }
  state.SetLabel(lpcn::to_string(config.reuse_mode));
}
BENCHMARK(BM_Pipeline)->Args({0, 0})->Args({1, 0})->Args({2, 0})->Args({2, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
