#include "lpcn/scheduling.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>
#include <unordered_set>

namespace lpcn {

HubCache::HubCache(std::size_t capacity) : capacity_(capacity) {}

bool HubCache::try_insert(PointId id, std::vector<double> value, PointId source_central) {
  if (entries_.contains(id)) throw Error("hub cache already holds point " + std::to_string(id));
  if (full()) return false;
  entries_.emplace(id, CacheEntry{std::move(value), source_central});
  log_.push_back(id);
  return true;
}

const CacheEntry* HubCache::find(PointId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t OverlapIndex::hit_count() const {
  return static_cast<std::size_t>(
      std::count_if(marks.begin(), marks.end(), [](OverlapMark m) { return m != OverlapMark::kMiss; }));
}

OverlapIndex detect_overlap(const Octree& hub_octree, const PointSubset& subset, SearchStats* stats) {
  OverlapIndex index;
  index.ids = subset.member_ids;
  index.marks.reserve(subset.size());
  std::unordered_set<PointId> earlier;
  for (PointId id : subset.member_ids) {
    if (!earlier.insert(id).second) {
      index.marks.push_back(OverlapMark::kDuplicate);
    } else {
      index.marks.push_back(hub_octree.contains(id, stats) ? OverlapMark::kHit : OverlapMark::kMiss);
    }
  }
  return index;
}

namespace {

struct PooledRow {
  std::vector<double> value;  // post-activation output used for pooling
  bool reused = false;
};

SubsetResult pool_rows(PointId central, const std::vector<PooledRow>& rows) {
  SubsetResult result;
  result.central_id = central;
  const std::size_t dim = rows.front().value.size();
  result.pooled = rows.front().value;
  std::vector<bool> from_reused(dim, rows.front().reused);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if (rows[r].value[c] > result.pooled[c]) {
        result.pooled[c] = rows[r].value[c];
        from_reused[c] = rows[r].reused;
      }
    }
  }
  result.reused_argmax_channels =
      static_cast<std::size_t>(std::count(from_reused.begin(), from_reused.end(), true));
  return result;
}

// Full fetch + compute of every distinct member. Returns the per-position
// rows and, through `cached`, the value each distinct point would be cached
// with (pre-final-activation in compensated mode).
std::vector<PooledRow> compute_full(const PointSubset& subset, const PointCloud& cloud,
                                    const MlpModel& model, ReuseMode mode, WorkloadCounters& counters,
                                    std::vector<std::pair<PointId, std::vector<double>>>* cached) {
  const bool keep_pre_activation = mode == ReuseMode::kCompensatedReuse;
  std::unordered_map<PointId, std::size_t> first_pos;
  std::vector<PooledRow> rows(subset.size());
  for (std::size_t p = 0; p < subset.size(); ++p) {
    const PointId id = subset.member_ids[p];
    const auto [it, fresh] = first_pos.try_emplace(id, p);
    if (!fresh) {
      rows[p] = rows[it->second];
      continue;
    }
    ++counters.feature_fetches;
    counters.mac_count += model.macs_per_point();
    const auto input = normalized_row(cloud, id, subset.central_id);
    auto value = mlp_forward_row(model, input, !keep_pre_activation);
    if (cached) cached->emplace_back(id, value);
    if (keep_pre_activation) apply_activation(model.final_activation(), value);
    rows[p].value = std::move(value);
  }
  return rows;
}

}  // namespace

std::vector<SubsetResult> schedule_island(const Island& island, const PointCloud& cloud,
                                          const Octree& input_octree, const MlpModel& model,
                                          const RunConfig& config, WorkloadCounters& counters) {
  if (model.input_dim() != 3 + cloud.feat_dim()) {
    throw Error("model input dimension " + std::to_string(model.input_dim()) +
                " does not match point width 3+" + std::to_string(cloud.feat_dim()));
  }
  std::vector<SubsetResult> results;
  if (island.subsets.empty()) return results;
  results.reserve(island.subsets.size());
  const ReuseMode mode = config.reuse_mode;

  if (mode == ReuseMode::kBaseline) {
    for (const auto& subset : island.subsets) {
      results.push_back(pool_rows(subset.central_id, compute_full(subset, cloud, model, mode, counters, nullptr)));
    }
    return results;
  }

  const bool compensated = mode == ReuseMode::kCompensatedReuse;
  HubCache cache(config.hub_cache_entries);

  // Hub subset: complete computation, every result cached.
  const PointSubset& hub = island.subsets.front();
  std::vector<std::pair<PointId, std::vector<double>>> hub_values;
  results.push_back(pool_rows(hub.central_id, compute_full(hub, cloud, model, mode, counters, &hub_values)));
  std::vector<PointId> hub_ids;
  for (auto& [id, value] : hub_values) {
    hub_ids.push_back(id);
    if (!cache.try_insert(id, std::move(value), hub.central_id)) {
      throw Error("hub cache capacity is smaller than the hub subset");
    }
  }
  Octree hub_octree = input_octree.extract_hub(hub_ids);

  for (std::size_t s = 1; s < island.subsets.size(); ++s) {
    const PointSubset& subset = island.subsets[s];
    SearchStats stats;
    const OverlapIndex overlap = detect_overlap(hub_octree, subset, &stats);
    const Point3& central_pos = cloud[subset.central_id].pos;

    // One linearized forward per distinct non-zero delta among the hits.
    std::map<PointId, std::vector<double>> adjustments;
    for (std::size_t p = 0; p < overlap.marks.size(); ++p) {
      if (overlap.marks[p] != OverlapMark::kHit) continue;
      const CacheEntry* entry = cache.find(overlap.ids[p]);
      if (!entry) throw Error("hub octree and hub cache disagree on point " + std::to_string(overlap.ids[p]));
      if (adjustments.contains(entry->source_central)) continue;
      const Point3& src = cloud[entry->source_central].pos;
      const double delta[3] = {static_cast<double>(src.x) - central_pos.x,
                               static_cast<double>(src.y) - central_pos.y,
                               static_cast<double>(src.z) - central_pos.z};
      if (delta[0] == 0.0 && delta[1] == 0.0 && delta[2] == 0.0) {
        adjustments.emplace(entry->source_central, std::vector<double>{});
        continue;
      }
      adjustments.emplace(entry->source_central, linearized_delta(model, std::span<const double>(delta, 3)));
      ++counters.compensation_forwards;
      counters.mac_count += model.macs_per_point();
    }

    std::vector<PooledRow> rows(subset.size());
    std::unordered_map<PointId, std::size_t> first_pos;
    for (std::size_t p = 0; p < subset.size(); ++p) {
      const PointId id = overlap.ids[p];
      first_pos.try_emplace(id, p);
      switch (overlap.marks[p]) {
        case OverlapMark::kDuplicate:
          ++counters.cache_hits;
          rows[p] = rows[first_pos.at(id)];
          break;
        case OverlapMark::kHit: {
          ++counters.cache_hits;
          const CacheEntry* entry = cache.find(id);
          std::vector<double> value = entry->value;
          const auto& adj = adjustments.at(entry->source_central);
          for (std::size_t c = 0; c < adj.size(); ++c) value[c] += adj[c];
          if (compensated) apply_activation(model.final_activation(), value);
          rows[p] = PooledRow{std::move(value), true};
          break;
        }
        case OverlapMark::kMiss: {
          ++counters.cache_misses;
          ++counters.feature_fetches;
          counters.mac_count += model.macs_per_point();
          const auto input = normalized_row(cloud, id, subset.central_id);
          std::vector<double> value = mlp_forward_row(model, input, !compensated);
          std::vector<double> out = value;
          if (compensated) apply_activation(model.final_activation(), out);
          // Caching and tree updating happen together or not at all, so an
          // octree hit always has a cache entry behind it.
          if (cache.try_insert(id, std::move(value), subset.central_id)) {
            hub_octree.insert(cloud[id], &stats);
          } else {
            ++counters.cache_bypasses;
          }
          rows[p] = PooledRow{std::move(out), false};
          break;
        }
      }
    }
    counters.octree_search_steps += stats.nodes_touched;
    results.push_back(pool_rows(subset.central_id, rows));
  }
  return results;
}

PipelineResult run_pipeline(std::shared_ptr<const PointCloud> cloud, const RunConfig& config,
                            const MlpModel& model) {
  if (!cloud) throw Error("run_pipeline needs a cloud");
  config.validate(cloud->size());
  if (model.input_dim() != 3 + cloud->feat_dim()) {
    throw Error("model input dimension " + std::to_string(model.input_dim()) +
                " does not match point width 3+" + std::to_string(cloud->feat_dim()));
  }
  const Aabb bounds = compute_bounds(*cloud);
  const Octree input_octree = Octree::build(*cloud, bounds, config.octree_depth);

  PipelineResult out{structure(cloud, input_octree, config), {}, {}, {}, {}};
  out.partition = islandize(out.structured, config);

  const auto& islands = out.partition.islands;
  std::vector<std::vector<SubsetResult>> per_island(islands.size());
  out.island_counters.assign(islands.size(), WorkloadCounters{});
  auto run_one = [&](std::size_t i) {
    per_island[i] = schedule_island(islands[i], *cloud, input_octree, model, config, out.island_counters[i]);
  };

  if (config.parallel_islands && islands.size() > 1) {
    const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(hw, islands.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < islands.size(); i = next++) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < islands.size(); ++i) run_one(i);
  }

  out.counters.weight_fetches = model.parameter_count();
  for (const auto& c : out.island_counters) out.counters += c;

  std::unordered_map<PointId, SubsetResult*> by_central;
  for (auto& island_results : per_island) {
    for (auto& r : island_results) by_central.emplace(r.central_id, &r);
  }
  out.results.reserve(out.structured.centrals.size());
  for (PointId c : out.structured.centrals) out.results.push_back(std::move(*by_central.at(c)));
  return out;
}

}  // namespace lpcn
