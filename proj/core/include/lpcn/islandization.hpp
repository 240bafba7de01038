#pragma once

#include <string>
#include <vector>

#include "lpcn/core.hpp"
#include "lpcn/data_structuring.hpp"
#include "lpcn/octree.hpp"

namespace lpcn {

struct HubListEntry {
  PointId central_id = 0;
  unsigned round = 0;
  bool operator==(const HubListEntry&) const = default;
};

/// Centrals claimed by one hub, hub first at round 0, then by round and claim
/// order within the round.
struct HubList {
  PointId hub_central_id = 0;
  std::vector<HubListEntry> members;
  bool operator==(const HubList&) const = default;
};

struct Island {
  std::size_t island_id = 0;
  std::vector<PointSubset> subsets;  // hub subset first, HubList order
  HubList source;
  bool operator==(const Island&) const = default;
};

struct IslandPartition {
  std::vector<Island> islands;
  bool operator==(const IslandPartition&) const = default;
};

/// ceil(M / S) hubs drawn without replacement with the hub stream of `seed`;
/// returned in ascending id order.
std::vector<PointId> select_hub_points(std::span<const PointId> centrals, std::size_t island_size,
                                       std::uint64_t seed);

/// Synchronized ring expansion on the Sampled Octree. In round t every hub
/// proposes the unclaimed leaves at Chebyshev ring t around its own cell;
/// a leaf goes to the proposing hub whose point is nearest the leaf's cell
/// center (lower hub id on ties) and all of its centrals join that hub's
/// list. Hubs are always the first member of their own list.
std::vector<HubList> gather_hub_lists(const Octree& sampled_octree, const PointCloud& cloud,
                                      std::span<const PointId> hubs);

/// One island per hub list, subsets looked up in list order. Throws Error
/// if the lists do not cover the centrals exactly once.
IslandPartition form_islands(const StructuredCloud& structured, std::span<const HubList> hub_lists);

IslandPartition islandize(const StructuredCloud& structured, const RunConfig& config);

/// `island <id> hub <hub> size <n>: <central>@<round> ...`, one line per island.
std::string dump_partition(const IslandPartition& partition);

}  // namespace lpcn
