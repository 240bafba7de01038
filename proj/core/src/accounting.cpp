#include "lpcn/accounting.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace lpcn {

WorkloadCounters& WorkloadCounters::operator+=(const WorkloadCounters& o) {
  feature_fetches += o.feature_fetches;
  weight_fetches += o.weight_fetches;
  mac_count += o.mac_count;
  cache_hits += o.cache_hits;
  cache_misses += o.cache_misses;
  cache_bypasses += o.cache_bypasses;
  octree_search_steps += o.octree_search_steps;
  compensation_forwards += o.compensation_forwards;
  return *this;
}

OverlapHistogram overlap_histogram(const StructuredCloud& structured) {
  const auto& subsets = structured.subsets;
  const std::size_t m = subsets.size();
  if (m < 2) throw Error("overlap histogram needs at least two subsets");
  const PointCloud& cloud = *structured.cloud;

  std::vector<std::vector<PointId>> distinct(m);
  for (std::size_t i = 0; i < m; ++i) {
    distinct[i] = subsets[i].member_ids;
    std::sort(distinct[i].begin(), distinct[i].end());
    distinct[i].erase(std::unique(distinct[i].begin(), distinct[i].end()), distinct[i].end());
  }

  OverlapHistogram h;
  const char* names[4] = {"nearest_16", "next_16", "next_32", "remainder"};
  const std::size_t edges[4] = {16, 32, 64, std::numeric_limits<std::size_t>::max()};
  std::array<double, 4> sums{};
  for (int b = 0; b < 4; ++b) {
    h.buckets[b].name = names[b];
    h.buckets[b].min_pct = std::numeric_limits<double>::infinity();
  }

  std::vector<std::pair<double, std::size_t>> ranked(m - 1);
  std::vector<PointId> common;
  for (std::size_t i = 0; i < m; ++i) {
    const Point3& ci = cloud[subsets[i].central_id].pos;
    std::size_t k = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) ranked[k++] = {distance_sq(ci, cloud[subsets[j].central_id].pos), j};
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return subsets[a.second].central_id < subsets[b.second].central_id;
    });
    const double k_size = static_cast<double>(subsets[i].size());
    for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
      const auto& other = distinct[ranked[rank].second];
      common.clear();
      std::set_intersection(distinct[i].begin(), distinct[i].end(), other.begin(), other.end(),
                            std::back_inserter(common));
      const double pct = 100.0 * static_cast<double>(common.size()) / k_size;
      int b = 0;
      while (rank >= edges[b]) ++b;
      auto& bucket = h.buckets[b];
      ++bucket.pairs;
      bucket.min_pct = std::min(bucket.min_pct, pct);
      bucket.max_pct = std::max(bucket.max_pct, pct);
      sums[b] += pct;
    }
  }
  for (int b = 0; b < 4; ++b) {
    auto& bucket = h.buckets[b];
    if (bucket.pairs == 0) {
      bucket.min_pct = 0.0;
    } else {
      bucket.mean_pct = sums[b] / static_cast<double>(bucket.pairs);
    }
  }
  return h;
}

SavingsReport savings_report(const WorkloadCounters& baseline, const WorkloadCounters& optimized,
                             const MlpModel& model) {
  if (baseline.feature_fetches == 0 || baseline.mac_count == 0) {
    throw Error("savings report needs a baseline with non-zero fetches and MACs");
  }
  auto reduction = [](double base, double opt) { return 100.0 * (1.0 - opt / base); };
  const double width = static_cast<double>(model.input_dim());
  SavingsReport r;
  r.feature_fetch_reduction = reduction(static_cast<double>(baseline.feature_fetches),
                                        static_cast<double>(optimized.feature_fetches));
  r.overall_memory_reduction =
      reduction(static_cast<double>(baseline.feature_fetches) * width + static_cast<double>(baseline.weight_fetches),
                static_cast<double>(optimized.feature_fetches) * width + static_cast<double>(optimized.weight_fetches));
  r.computation_reduction =
      reduction(static_cast<double>(baseline.mac_count), static_cast<double>(optimized.mac_count));
  return r;
}

ReuseTotals brute_force_reuse_oracle(const IslandPartition& partition) {
  ReuseTotals totals;
  for (const Island& island : partition.islands) {
    if (island.subsets.empty()) continue;
    std::unordered_set<PointId> seen(island.subsets.front().member_ids.begin(),
                                     island.subsets.front().member_ids.end());
    for (std::size_t s = 1; s < island.subsets.size(); ++s) {
      for (PointId id : island.subsets[s].member_ids) {
        if (seen.contains(id)) {
          ++totals.hits;
        } else {
          ++totals.misses;
          seen.insert(id);
        }
      }
    }
  }
  return totals;
}

std::string histogram_csv(const OverlapHistogram& h) {
  std::ostringstream os;
  os << "bucket,pairs,min_pct,max_pct,mean_pct\n";
  char buf[160];
  for (const auto& b : h.buckets) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%.4f,%.4f\n", b.name.c_str(), b.pairs, b.min_pct,
                  b.max_pct, b.mean_pct);
    os << buf;
  }
  return os.str();
}

}  // namespace lpcn
