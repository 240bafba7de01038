#include <gtest/gtest.h>

#include <set>
#include <unordered_set>

#include "lpcn/accounting.hpp"
#include "lpcn/data_structuring.hpp"
#include "lpcn/scheduling.hpp"
#include "test_support.hpp"

using namespace lpcn;
using test::model_of;

namespace {

struct Fixture {
  std::shared_ptr<const PointCloud> cloud;
  Octree tree;
};

Fixture fixture(std::size_t n, std::uint64_t seed, std::size_t feat_dim = 2) {
  auto c = test::make_cloud(CloudKind::kSphereSurface, n, seed, feat_dim);
  auto t = Octree::build(*c, compute_bounds(*c), 6);
  return {c, std::move(t)};
}

RunConfig cfg_with(ReuseMode mode, std::size_t k, std::size_t cache = kUnboundedCache) {
  RunConfig c;
  c.reuse_mode = mode;
  c.subset_size = k;
  c.hub_cache_entries = cache;
  return c;
}

// Replay with a bounded store: within-subset repeats hit, a fresh id hits when
// stored, otherwise it is fetched and stored while room remains.
struct BoundedReplay {
  std::uint64_t hits = 0, misses = 0, bypasses = 0, fetches = 0;
};

BoundedReplay bounded_replay(const Island& island, std::size_t capacity) {
  BoundedReplay r;
  std::set<PointId> stored(island.subsets.front().member_ids.begin(), island.subsets.front().member_ids.end());
  r.fetches = stored.size();
  for (std::size_t s = 1; s < island.subsets.size(); ++s) {
    std::set<PointId> local;
    for (PointId id : island.subsets[s].member_ids) {
      if (!local.insert(id).second || stored.contains(id)) {
        ++r.hits;
        continue;
      }
      ++r.misses;
      ++r.fetches;
      if (stored.size() < capacity) stored.insert(id);
      else ++r.bypasses;
    }
  }
  return r;
}

Island island_of(const PointCloud& c, const Octree& t, const std::vector<PointId>& centrals, std::size_t k) {
  Island island;
  island.source.hub_central_id = centrals.front();
  for (PointId id : centrals) {
    island.subsets.push_back(knn(c, t, id, k));
    island.source.members.push_back({id, 0});
  }
  return island;
}

}  // namespace

TEST(HubCache, RefusesWhenFull) {
  HubCache cache(2);
  EXPECT_TRUE(cache.try_insert(5, {1.0}, 0));
  EXPECT_TRUE(cache.try_insert(6, {2.0}, 0));
  EXPECT_TRUE(cache.full());
  EXPECT_FALSE(cache.try_insert(7, {3.0}, 1));
  EXPECT_THROW(cache.try_insert(5, {1.0}, 0), Error);
  EXPECT_EQ(cache.insertion_log(), (std::vector<PointId>{5, 6}));
  ASSERT_NE(cache.find(6), nullptr);
  EXPECT_EQ(cache.find(6)->value, std::vector<double>{2.0});
  EXPECT_EQ(cache.find(7), nullptr);
}

TEST(Overlap, HubItselfAllHits) {
  const auto f = fixture(512, 1);
  const auto hub = knn(*f.cloud, f.tree, 3, 32);
  const auto h = f.tree.extract_hub(hub.member_ids);
  const auto idx = detect_overlap(h, hub);
  EXPECT_EQ(idx.hit_count(), 32u);
  for (auto m : idx.marks) EXPECT_EQ(m, OverlapMark::kHit);
}

TEST(Overlap, DisjointNoHits) {
  const auto f = fixture(512, 1);
  const PointSubset a{0, {0, 1, 2, 3}};
  const PointSubset b{10, {10, 11, 12, 13}};
  const auto idx = detect_overlap(f.tree.extract_hub(a.member_ids), b);
  EXPECT_EQ(idx.hit_count(), 0u);
}

TEST(Overlap, SeventeenOfThirtyTwo) {
  const auto f = fixture(512, 1);
  PointSubset a{0, {}}, b{100, {}};
  for (PointId i = 0; i < 32; ++i) a.member_ids.push_back(i);
  for (PointId i = 15; i < 47; ++i) b.member_ids.push_back(i);
  const auto idx = detect_overlap(f.tree.extract_hub(a.member_ids), b);
  EXPECT_EQ(idx.hit_count(), 17u);
  EXPECT_NEAR(100.0 * double(idx.hit_count()) / 32.0, 53.0, 0.2);
}

TEST(Overlap, PaddingMarkedDuplicate) {
  const auto f = fixture(64, 1);
  const PointSubset hub{0, {0, 1}};
  const PointSubset s{5, {5, 1, 5, 5}};
  const auto idx = detect_overlap(f.tree.extract_hub(hub.member_ids), s);
  EXPECT_EQ(idx.marks, (std::vector<OverlapMark>{OverlapMark::kMiss, OverlapMark::kHit, OverlapMark::kDuplicate,
                                                 OverlapMark::kDuplicate}));
  EXPECT_EQ(idx.hit_count(), 3u);
}

TEST(Schedule, SingleSubsetEqualsBaseline) {
  const auto f = fixture(512, 2);
  const auto m = model_of({{5, 16, Activation::kRelu}, {16, 8, Activation::kRelu}}, 2);
  const Island island = island_of(*f.cloud, f.tree, {7}, 16);
  for (auto mode : {ReuseMode::kExactReuse, ReuseMode::kCompensatedReuse}) {
    WorkloadCounters base, opt;
    const auto rb = schedule_island(island, *f.cloud, f.tree, m, cfg_with(ReuseMode::kBaseline, 16), base);
    const auto ro = schedule_island(island, *f.cloud, f.tree, m, cfg_with(mode, 16), opt);
    EXPECT_EQ(base, opt);
    ASSERT_EQ(rb.size(), 1u);
    EXPECT_EQ(rb[0].pooled, ro[0].pooled);
    EXPECT_LE(test::max_rel_diff(test::naive_pooled(*f.cloud, m, 7, island.subsets[0].member_ids), rb[0].pooled),
              1e-9);
  }
}

TEST(Schedule, IdenticalSubsetsReuseEverything) {
  const auto f = fixture(512, 2);
  const auto m = model_of({{5, 16, Activation::kRelu}, {16, 8, Activation::kRelu}}, 2);
  Island island = island_of(*f.cloud, f.tree, {7}, 32);
  island.subsets.push_back(island.subsets[0]);
  island.source.members.push_back({7, 1});
  WorkloadCounters c;
  const auto r = schedule_island(island, *f.cloud, f.tree, m, cfg_with(ReuseMode::kCompensatedReuse, 32), c);
  EXPECT_EQ(c.cache_hits, 32u);
  EXPECT_EQ(c.cache_misses, 0u);
  EXPECT_EQ(c.feature_fetches, 32u);                  // hub only
  EXPECT_EQ(c.mac_count, 32u * m.macs_per_point());  // delta is zero: no compensation forward
  EXPECT_EQ(c.compensation_forwards, 0u);
  EXPECT_EQ(r[0].pooled, r[1].pooled);
  EXPECT_EQ(r[1].reused_argmax_channels, 8u);
}

TEST(Schedule, CountersMatchReplay) {
  const auto f = fixture(1500, 3);
  const auto m = model_of({{5, 8, Activation::kRelu}}, 3);
  Rng rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<PointId> centrals{static_cast<PointId>(rng.below(1500))};
    // Neighbours of the hub so that subsets overlap, plus a few far ones.
    const auto near = knn(*f.cloud, f.tree, centrals[0], 24).member_ids;
    for (std::size_t i = 1; i < near.size(); i += 2) centrals.push_back(near[i]);
    for (int i = 0; i < 3; ++i) centrals.push_back(static_cast<PointId>(rng.below(1500)));
    const std::size_t k = 8 + 8 * (trial % 3);
    Island island = island_of(*f.cloud, f.tree, centrals, k);
    if (trial % 2) {
      // Padding-heavy ball-query subsets.
      for (auto& s : island.subsets) s = ball_query(*f.cloud, f.tree, s.central_id, 0.08, k);
    }
    for (std::size_t cap : {kUnboundedCache, 2 * k, k}) {
      WorkloadCounters c;
      schedule_island(island, *f.cloud, f.tree, m, cfg_with(ReuseMode::kExactReuse, k, cap), c);
      const auto expect = bounded_replay(island, cap);
      EXPECT_EQ(c.cache_hits, expect.hits);
      EXPECT_EQ(c.cache_misses, expect.misses);
      EXPECT_EQ(c.cache_bypasses, expect.bypasses);
      EXPECT_EQ(c.feature_fetches, expect.fetches);
      EXPECT_EQ(c.mac_count, (c.feature_fetches + c.compensation_forwards) * m.macs_per_point());
      if (cap == kUnboundedCache) {
        const auto plain = test::replay_island(island);
        EXPECT_EQ(c.cache_hits, plain.hits);
        EXPECT_EQ(c.cache_misses, plain.misses);
      }
    }
  }
}

TEST(Schedule, HitsPlusMissesCoverNonHubPositions) {
  const auto f = fixture(800, 4);
  const auto m = model_of({{5, 8, Activation::kRelu}}, 4);
  RunConfig cfg = cfg_with(ReuseMode::kCompensatedReuse, 16, 32);
  cfg.num_centrals = 300;
  cfg.island_size = 20;
  const auto run = run_pipeline(f.cloud, cfg, m);
  std::uint64_t non_hub = 0;
  for (const auto& island : run.partition.islands) non_hub += (island.subsets.size() - 1) * 16;
  EXPECT_EQ(run.counters.cache_hits + run.counters.cache_misses, non_hub);
  EXPECT_LE(run.counters.cache_bypasses, run.counters.cache_misses);
}

TEST(Schedule, InputDimensionMismatch) {
  const auto f = fixture(100, 4);
  const auto m = model_of({{6, 8, Activation::kRelu}}, 4);
  const Island island = island_of(*f.cloud, f.tree, {1}, 4);
  WorkloadCounters c;
  EXPECT_THROW(schedule_island(island, *f.cloud, f.tree, m, cfg_with(ReuseMode::kBaseline, 4), c), Error);
}

TEST(Pipeline, LinearModelExactReuseMatchesBaseline) {
  const auto f = fixture(700, 5);
  const auto m = model_of({{5, 12, Activation::kNone}, {12, 6, Activation::kNone}}, 5);
  RunConfig cfg = cfg_with(ReuseMode::kBaseline, 16, 32);
  cfg.num_centrals = 250;
  cfg.island_size = 16;
  const auto base = run_pipeline(f.cloud, cfg, m);
  for (auto mode : {ReuseMode::kExactReuse, ReuseMode::kCompensatedReuse}) {
    cfg.reuse_mode = mode;
    const auto opt = run_pipeline(f.cloud, cfg, m);
    EXPECT_LE(reuse_error_report(base.results, opt.results).max_rel_error, 1e-6);
    EXPECT_LT(opt.counters.feature_fetches, base.counters.feature_fetches);
    EXPECT_LT(opt.counters.mac_count, base.counters.mac_count);
  }
  // Baseline against first principles.
  for (std::size_t i = 0; i < base.results.size(); i += 25) {
    const auto& s = base.structured.subsets[i];
    EXPECT_LE(test::max_rel_diff(test::naive_pooled(*f.cloud, m, s.central_id, s.member_ids), base.results[i].pooled),
              1e-9);
  }
}

TEST(Pipeline, EndActivationCompensatedExact) {
  const auto f = fixture(700, 6);
  const auto m = model_of({{5, 12, Activation::kNone}, {12, 6, Activation::kRelu}}, 6);
  RunConfig cfg = cfg_with(ReuseMode::kBaseline, 16, 32);
  cfg.num_centrals = 250;
  cfg.island_size = 16;
  const auto base = run_pipeline(f.cloud, cfg, m);
  cfg.reuse_mode = ReuseMode::kCompensatedReuse;
  EXPECT_LE(reuse_error_report(base.results, run_pipeline(f.cloud, cfg, m).results).max_rel_error, 1e-6);
}

TEST(Pipeline, HiddenReluIsApproximate) {
  const auto f = fixture(1024, 7);
  const auto m = model_of({{5, 32, Activation::kRelu}, {32, 32, Activation::kRelu}, {32, 64, Activation::kRelu}}, 7);
  RunConfig cfg = cfg_with(ReuseMode::kBaseline, 32);
  const auto base = run_pipeline(f.cloud, cfg, m);
  cfg.reuse_mode = ReuseMode::kCompensatedReuse;
  const auto report = reuse_error_report(base.results, run_pipeline(f.cloud, cfg, m).results);
  EXPECT_GT(report.max_rel_error, 0.0);
  RecordProperty("max_rel_error", std::to_string(report.max_rel_error));
}

TEST(Pipeline, FetchReductionIdentity) {
  const auto f = fixture(1024, 8);
  const auto m = model_of({{5, 8, Activation::kRelu}}, 8);
  RunConfig cfg = cfg_with(ReuseMode::kBaseline, 32);  // knn: no padding
  const auto base = run_pipeline(f.cloud, cfg, m);
  cfg.reuse_mode = ReuseMode::kExactReuse;
  const auto opt = run_pipeline(f.cloud, cfg, m);
  EXPECT_EQ(base.counters.feature_fetches, 512u * 32u);
  const auto s = savings_report(base.counters, opt.counters, m);
  EXPECT_GT(s.feature_fetch_reduction, 0.0);
  EXPECT_NEAR(s.feature_fetch_reduction, 100.0 * double(opt.counters.cache_hits) / (512.0 * 32.0), 1e-9);
  EXPECT_EQ(base.counters.weight_fetches, m.parameter_count());
  EXPECT_EQ(opt.counters.weight_fetches, m.parameter_count());
  const auto oracle = brute_force_reuse_oracle(opt.partition);
  EXPECT_EQ(opt.counters.cache_hits, oracle.hits);
  EXPECT_EQ(opt.counters.cache_misses, oracle.misses);
}

TEST(Pipeline, DeterministicAndParallelIdentical) {
  const auto f = fixture(1024, 9);
  const auto m = model_of({{5, 16, Activation::kRelu}, {16, 16, Activation::kRelu}}, 9);
  RunConfig cfg = cfg_with(ReuseMode::kCompensatedReuse, 32, 64);
  const auto a = run_pipeline(f.cloud, cfg, m);
  const auto b = run_pipeline(f.cloud, cfg, m);
  cfg.parallel_islands = true;
  const auto p = run_pipeline(f.cloud, cfg, m);
  for (const auto* other : {&b, &p}) {
    EXPECT_EQ(a.counters, other->counters);
    EXPECT_EQ(a.results, other->results);
    EXPECT_EQ(a.partition, other->partition);
    ASSERT_EQ(a.island_counters.size(), other->island_counters.size());
    for (std::size_t i = 0; i < a.island_counters.size(); ++i) EXPECT_EQ(a.island_counters[i], other->island_counters[i]);
  }
  for (std::size_t i = 0; i < a.results.size(); ++i) EXPECT_EQ(a.results[i].central_id, a.structured.centrals[i]);
}

TEST(Pipeline, BaselineStillPartitions) {
  const auto f = fixture(300, 10);
  const auto m = model_of({{5, 4, Activation::kRelu}}, 10);
  RunConfig cfg = cfg_with(ReuseMode::kBaseline, 8);
  cfg.num_centrals = 100;
  cfg.island_size = 10;
  const auto run = run_pipeline(f.cloud, cfg, m);
  EXPECT_EQ(run.partition.islands.size(), 10u);
  EXPECT_EQ(run.counters.cache_hits + run.counters.cache_misses + run.counters.compensation_forwards, 0u);
  EXPECT_EQ(run.counters.feature_fetches, 100u * 8u);
}
