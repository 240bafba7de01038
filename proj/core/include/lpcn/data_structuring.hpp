#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lpcn/core.hpp"
#include "lpcn/octree.hpp"

namespace lpcn {

/// K-point neighborhood of one central point. The central is always at
/// position 0; underfull ball queries repeat the central id to reach K.
struct PointSubset {
  PointId central_id = 0;
  std::vector<PointId> member_ids;

  std::size_t size() const { return member_ids.size(); }
  /// Number of distinct ids (padding collapsed).
  std::size_t distinct_count() const;
  bool operator==(const PointSubset&) const = default;
};

struct StructuredCloud {
  std::shared_ptr<const PointCloud> cloud;
  std::vector<PointId> centrals;      // selection order
  std::vector<PointSubset> subsets;   // subsets[i].central_id == centrals[i]
  Octree sampled_octree;              // indexes exactly the centrals
};

/// Farthest point sampling from an explicit start point. Each new central
/// maximizes its distance to the already-chosen set; ties go to the lower id.
std::vector<PointId> farthest_point_sampling(const PointCloud& cloud, std::size_t m, PointId start);

/// Same, with the start point drawn from the sampling stream of `seed`.
std::vector<PointId> farthest_point_sampling(const PointCloud& cloud, std::size_t m,
                                             std::uint64_t seed);

/// Up to K ids within `radius` of the central (inclusive), ordered by
/// distance then id, central first, padded with the central id.
PointSubset ball_query(const PointCloud& cloud, const Octree& octree, PointId center_id,
                       double radius, std::size_t k);

/// K nearest points by best-first octree search; central first, then
/// ascending (distance, id). Throws Error if K > n.
PointSubset knn(const PointCloud& cloud, const Octree& octree, PointId center_id, std::size_t k);

/// Sampling, neighbor gathering, and pruning to the Sampled Octree.
StructuredCloud structure(std::shared_ptr<const PointCloud> cloud, const Octree& input_octree,
                          const RunConfig& config);

}  // namespace lpcn
