#include "lpcn/islandization.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lpcn/rng.hpp"

namespace lpcn {

std::vector<PointId> select_hub_points(std::span<const PointId> centrals, std::size_t island_size,
                                       std::uint64_t seed) {
  if (island_size == 0) throw Error("island size S must be positive");
  if (centrals.empty()) throw Error("cannot select hubs from an empty central set");
  const std::size_t m = centrals.size();
  const std::size_t hubs = (m + island_size - 1) / island_size;

  // Partial Fisher-Yates over a copy.
  std::vector<PointId> pool(centrals.begin(), centrals.end());
  Rng rng = Rng::stream(seed, streams::kHubs);
  for (std::size_t i = 0; i < hubs; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(hubs);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<HubList> gather_hub_lists(const Octree& sampled_octree, const PointCloud& cloud,
                                      std::span<const PointId> hubs) {
  if (hubs.empty()) throw Error("gather_hub_lists needs at least one hub");
  std::vector<HubList> lists;
  lists.reserve(hubs.size());
  std::unordered_set<PointId> hub_set;
  for (PointId h : hubs) {
    if (!sampled_octree.contains(h)) {
      throw Error("hub " + std::to_string(h) + " is not a central point");
    }
    if (!hub_set.insert(h).second) throw Error("hub " + std::to_string(h) + " listed twice");
    lists.push_back(HubList{h, {HubListEntry{h, 0}}});
  }

  std::size_t unclaimed = sampled_octree.size() - hubs.size();
  std::unordered_set<std::uint64_t> claimed_cells;
  const unsigned max_ring = 1u << sampled_octree.depth();

  for (unsigned round = 0; unclaimed > 0; ++round) {
    if (round > max_ring) throw Error("hub gathering exceeded the ring limit; unreachable centrals");

    struct Proposal {
      double d2;
      std::size_t hub_index;
      std::span<const PointId> points;
    };
    // Ordered by code so that resolution is independent of hash order.
    std::map<std::uint64_t, Proposal> winners;
    for (std::size_t h = 0; h < hubs.size(); ++h) {
      const Point3& hub_pos = cloud[hubs[h]].pos;
      const MortonCode hub_code = sampled_octree.code_of(hubs[h]);
      for (const LeafRef& leaf : sampled_octree.adjacent_leaves(hub_code, round)) {
        if (claimed_cells.contains(leaf.code.bits)) continue;
        const Aabb box = decode_morton(leaf.code, sampled_octree.bounds());
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = 0.5 * (box.min[a] + box.max[a]) - static_cast<double>(hub_pos[a]);
          d2 += d * d;
        }
        auto [it, fresh] = winners.try_emplace(leaf.code.bits, Proposal{d2, h, leaf.points});
        if (!fresh && (d2 < it->second.d2 || (d2 == it->second.d2 && hubs[h] < hubs[it->second.hub_index]))) {
          it->second = Proposal{d2, h, leaf.points};
        }
      }
    }

    // Per hub, claims in ascending (distance, code) order.
    std::vector<std::vector<std::pair<double, std::uint64_t>>> per_hub(hubs.size());
    for (const auto& [code, p] : winners) per_hub[p.hub_index].emplace_back(p.d2, code);
    for (std::size_t h = 0; h < hubs.size(); ++h) {
      std::sort(per_hub[h].begin(), per_hub[h].end());
      for (const auto& [d2, code] : per_hub[h]) {
        claimed_cells.insert(code);
        for (PointId c : winners.at(code).points) {
          if (hub_set.contains(c)) continue;
          lists[h].members.push_back(HubListEntry{c, round});
          --unclaimed;
        }
      }
    }
  }
  return lists;
}

IslandPartition form_islands(const StructuredCloud& structured, std::span<const HubList> hub_lists) {
  std::unordered_map<PointId, std::size_t> subset_of;
  for (std::size_t i = 0; i < structured.subsets.size(); ++i) {
    subset_of.emplace(structured.subsets[i].central_id, i);
  }
  std::unordered_set<PointId> seen;
  IslandPartition partition;
  partition.islands.reserve(hub_lists.size());
  for (std::size_t i = 0; i < hub_lists.size(); ++i) {
    const HubList& list = hub_lists[i];
    if (list.members.empty() || list.members.front().central_id != list.hub_central_id) {
      throw Error("hub list " + std::to_string(i) + " does not start with its hub");
    }
    Island island;
    island.island_id = i;
    island.source = list;
    island.subsets.reserve(list.members.size());
    for (const auto& entry : list.members) {
      const auto it = subset_of.find(entry.central_id);
      if (it == subset_of.end()) {
        throw Error("hub list names " + std::to_string(entry.central_id) + ", which is not a central");
      }
      if (!seen.insert(entry.central_id).second) {
        throw Error("central " + std::to_string(entry.central_id) + " appears in more than one hub list");
      }
      island.subsets.push_back(structured.subsets[it->second]);
    }
    partition.islands.push_back(std::move(island));
  }
  if (seen.size() != structured.subsets.size()) {
    throw Error("hub lists cover " + std::to_string(seen.size()) + " of " +
                std::to_string(structured.subsets.size()) + " centrals");
  }
  return partition;
}

IslandPartition islandize(const StructuredCloud& structured, const RunConfig& config) {
  const auto hubs = select_hub_points(structured.centrals, config.island_size, config.seed);
  const auto lists = gather_hub_lists(structured.sampled_octree, *structured.cloud, hubs);
  return form_islands(structured, lists);
}

std::string dump_partition(const IslandPartition& partition) {
  std::ostringstream os;
  for (const Island& island : partition.islands) {
    os << "island " << island.island_id << " hub " << island.source.hub_central_id << " size "
       << island.subsets.size() << ':';
    for (const auto& e : island.source.members) os << ' ' << e.central_id << '@' << e.round;
    os << '\n';
  }
  return os.str();
}

}  // namespace lpcn
