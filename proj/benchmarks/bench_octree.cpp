#include <benchmark/benchmark.h>

#include <memory>

#include "lpcn/data_structuring.hpp"
#include "lpcn/octree.hpp"
#include "lpcn/rng.hpp"
#include "lpcn/synth.hpp"

namespace {

lpcn::PointCloud sphere(std::size_t n) {
  lpcn::CloudSpec spec;
  spec.kind = lpcn::CloudKind::kSphereSurface;
  spec.n = n;
  return lpcn::generate(spec);
}

void BM_OctreeBuild(benchmark::State& state) {
  const auto cloud = sphere(static_cast<std::size_t>(state.range(0)));
  const auto bounds = lpcn::compute_bounds(cloud);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpcn::Octree::build(cloud, bounds, 6));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OctreeBuild)->Arg(1024)->Arg(8192);

void BM_OctreeContains(benchmark::State& state) {
  const auto cloud = sphere(4096);
  const auto tree = lpcn::Octree::build(cloud, lpcn::compute_bounds(cloud), 6);
  lpcn::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.contains(static_cast<lpcn::PointId>(rng.below(4096))));
  }
}
BENCHMARK(BM_OctreeContains);

void BM_Knn(benchmark::State& state) {
  const auto cloud = sphere(static_cast<std::size_t>(state.range(0)));
  const auto tree = lpcn::Octree::build(cloud, lpcn::compute_bounds(cloud), 6);
  lpcn::Rng rng(2);
  for (auto _ : state) {
    const auto id = static_cast<lpcn::PointId>(rng.below(cloud.size()));
    benchmark::DoNotOptimize(lpcn::knn(cloud, tree, id, 32));
  }
}
BENCHMARK(BM_Knn)->Arg(1024)->Arg(8192);

void BM_BallQuery(benchmark::State& state) {
  const auto cloud = sphere(4096);
  const auto tree = lpcn::Octree::build(cloud, lpcn::compute_bounds(cloud), 6);
  lpcn::Rng rng(3);
  for (auto _ : state) {
    const auto id = static_cast<lpcn::PointId>(rng.below(cloud.size()));
    benchmark::DoNotOptimize(lpcn::ball_query(cloud, tree, id, 0.2, 32));
  }
}
BENCHMARK(BM_BallQuery);

}  // namespace
