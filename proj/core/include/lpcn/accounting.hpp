#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "lpcn/data_structuring.hpp"
#include "lpcn/feature_compute.hpp"
#include "lpcn/islandization.hpp"

namespace lpcn {

struct WorkloadCounters {
  std::uint64_t feature_fetches = 0;
  std::uint64_t weight_fetches = 0;
  std::uint64_t mac_count = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t cache_bypasses = 0;
  std::uint64_t octree_search_steps = 0;
  std::uint64_t compensation_forwards = 0;

  WorkloadCounters& operator+=(const WorkloadCounters& o);
  bool operator==(const WorkloadCounters&) const = default;
};

struct OverlapBucket {
  std::string name;
  std::size_t pairs = 0;  // (subset, other) pairs aggregated
  double min_pct = 0.0;
  double max_pct = 0.0;
  double mean_pct = 0.0;
};

/// Pairwise overlap grouped by central-distance rank: nearest 16, next 16,
/// next 32, remainder.
struct OverlapHistogram {
  std::array<OverlapBucket, 4> buckets;
};

/// For every subset, ranks the others by central distance (ties by id) and
/// records |A ∩ B| / K over distinct members. Throws Error for fewer than
/// two subsets.
OverlapHistogram overlap_histogram(const StructuredCloud& structured);

struct SavingsReport {
  double feature_fetch_reduction = 0.0;   // percent
  double overall_memory_reduction = 0.0;  // percent, features + weights
  double computation_reduction = 0.0;     // percent
};

/// Reductions of `optimized` relative to `baseline`. Memory traffic counts
/// each feature fetch as input_dim values plus the weight fetches. Throws
/// Error if the baseline has zero fetches or MACs.
SavingsReport savings_report(const WorkloadCounters& baseline, const WorkloadCounters& optimized,
                             const MlpModel& model);

struct ReuseTotals {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  bool operator==(const ReuseTotals&) const = default;
};

/// Replays the island schedule with a plain growing set per island: the hub
/// subset seeds the set; a non-hub member hits iff already present, misses
/// are added.
ReuseTotals brute_force_reuse_oracle(const IslandPartition& partition);

std::string histogram_csv(const OverlapHistogram& h);

}  // namespace lpcn
