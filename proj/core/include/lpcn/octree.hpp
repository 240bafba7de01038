#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lpcn/core.hpp"
#include "lpcn/morton.hpp"

namespace lpcn {

/// One non-empty voxel. Children form a singly linked list
/// (first_child -> next_sibling -> ...) kept in ascending octant order.
struct OctreeNode {
  std::uint64_t prefix = 0;  // code bits of this voxel at `level`
  int level = 0;
  std::int32_t first_child = -1;
  std::int32_t next_sibling = -1;
  std::vector<PointId> points;  // sorted; leaves (level == depth) only
};

/// Leaf voxel as returned by neighborhood queries.
struct LeafRef {
  MortonCode code;
  std::span<const PointId> points;
};

/// Node-touch accounting for a single traversal.
struct SearchStats {
  std::uint64_t nodes_touched = 0;    // every node read, sibling hops included
  std::uint32_t internal_levels = 0;  // internal nodes on the root-to-leaf path
};

/// Morton-addressed octree over a subset of one cloud's points.
///
/// Trees derived from each other (prune, extract_hub) share the code table of
/// the cloud they were built from, so a point's code is computed once and
/// codes stay comparable across the Input, Sampled and Hub octrees.
class Octree {
 public:
  /// Indexes every point of `cloud`. Throws Error for points outside bounds.
  static Octree build(const PointCloud& cloud, const Aabb& bounds, int depth);

  /// New tree indexing exactly `kept`. Throws Error if `kept` is empty or
  /// names an id this tree does not index.
  Octree prune(std::span<const PointId> kept) const;

  /// Standalone Hub Octree over `subset_ids`; same bounds and depth. Duplicate
  /// ids are collapsed.
  Octree extract_hub(std::span<const PointId> subset_ids) const;

  /// Walks the Morton path of `id`'s code through the sibling lists, then
  /// checks the leaf's point set.
  bool contains(PointId id, SearchStats* stats = nullptr) const;

  /// Tree-updating insertion. Throws Error on duplicate id, on a record
  /// outside the bounds, or on an id/position not matching the indexed cloud.
  void insert(const PointRecord& record, SearchStats* stats = nullptr);

  /// Existing leaves whose cell lies at Chebyshev distance exactly `ring`
  /// (in leaf cells) from `seed`'s cell, in ascending code order.
  std::vector<LeafRef> adjacent_leaves(const MortonCode& seed, unsigned ring) const;

  /// Ids in every leaf whose voxel intersects the ball; a superset of the
  /// points within `radius` of `center`. Ascending id order.
  std::vector<PointId> radius_candidates(const Point3& center, double radius) const;

  /// Leaf node index for a full-depth code, or -1.
  std::int32_t find_leaf(std::uint64_t code, SearchStats* stats = nullptr) const;

  std::vector<LeafRef> leaves() const;
  std::vector<PointId> indexed_ids() const;

  MortonCode code_of(PointId id) const;
  const Aabb& bounds() const { return bounds_; }
  int depth() const { return depth_; }
  std::size_t size() const { return point_index_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaf_count_; }
  std::span<const OctreeNode> nodes() const { return nodes_; }
  std::int32_t leaf_of(PointId id) const;

  /// One line per node in depth-first order, indented by level:
  /// `<octal path> [ids...]` (ids on leaves only).
  std::string dump() const;

 private:
  Octree(Aabb bounds, int depth, std::shared_ptr<const std::vector<std::uint64_t>> codes);
  void insert_code(PointId id, std::uint64_t code, SearchStats* stats);
  std::int32_t child_with_octant(std::int32_t parent, unsigned octant, SearchStats* stats) const;
  void check_indexed(std::span<const PointId> ids) const;

  Aabb bounds_;
  int depth_ = 0;
  std::shared_ptr<const std::vector<std::uint64_t>> codes_;  // by cloud point id
  std::vector<OctreeNode> nodes_;                            // nodes_[0] is the root
  std::unordered_map<PointId, std::int32_t> point_index_;    // id -> leaf node
  std::size_t leaf_count_ = 0;
};

}  // namespace lpcn
