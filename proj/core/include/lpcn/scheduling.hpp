#pragma once

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lpcn/accounting.hpp"
#include "lpcn/core.hpp"
#include "lpcn/data_structuring.hpp"
#include "lpcn/feature_compute.hpp"
#include "lpcn/islandization.hpp"
#include "lpcn/octree.hpp"

namespace lpcn {

/// Per-point MLP result plus the central it was normalized against.
struct CacheEntry {
  std::vector<double> value;
  PointId source_central = 0;
};

/// Island-scoped result store. No eviction: once full, further inserts are
/// refused and the caller bypasses the cache. Cleared between islands by
/// constructing a fresh one.
class HubCache {
 public:
  explicit HubCache(std::size_t capacity);

  bool try_insert(PointId id, std::vector<double> value, PointId source_central);
  const CacheEntry* find(PointId id) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return entries_.size() >= capacity_; }
  const std::vector<PointId>& insertion_log() const { return log_; }

 private:
  std::size_t capacity_;
  std::unordered_map<PointId, CacheEntry> entries_;
  std::vector<PointId> log_;
};

enum class OverlapMark {
  kMiss,
  kHit,        // found in the Hub Octree
  kDuplicate,  // repeat of an earlier position in the same subset (padding)
};

struct OverlapIndex {
  std::vector<PointId> ids;
  std::vector<OverlapMark> marks;  // one per member position

  std::size_t hit_count() const;  // kHit + kDuplicate
};

/// Marks each member position: duplicates of an earlier position first, then
/// Hub Octree membership.
OverlapIndex detect_overlap(const Octree& hub_octree, const PointSubset& subset,
                            SearchStats* stats = nullptr);

/// Runs one island: the hub subset in full, then each non-hub subset in list
/// order with overlap detection, cached-result reuse and tree updating.
/// With ReuseMode::kBaseline every subset is fetched and computed in full.
/// Results come back in island subset order.
std::vector<SubsetResult> schedule_island(const Island& island, const PointCloud& cloud,
                                          const Octree& input_octree, const MlpModel& model,
                                          const RunConfig& config, WorkloadCounters& counters);

struct PipelineResult {
  StructuredCloud structured;
  IslandPartition partition;
  std::vector<SubsetResult> results;  // same order as structured.centrals
  WorkloadCounters counters;
  std::vector<WorkloadCounters> island_counters;
};

/// Structure, islandize, schedule every island with its own cache and Hub
/// Octree, then merge counters in island order. Weights are counted once.
PipelineResult run_pipeline(std::shared_ptr<const PointCloud> cloud, const RunConfig& config,
                            const MlpModel& model);

}  // namespace lpcn
