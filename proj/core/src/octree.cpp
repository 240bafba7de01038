#include "lpcn/octree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace lpcn {

namespace {

unsigned octant_at(std::uint64_t code, int depth, int level) {
  // Octant chosen when descending from `level` to `level + 1`.
  return static_cast<unsigned>((code >> (3 * (depth - 1 - level))) & 7u);
}

double box_distance_sq(const Aabb& box, const Point3& p) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double v = p[a];
    double d = 0.0;
    if (v < box.min[a]) d = box.min[a] - v;
    else if (v > box.max[a]) d = v - box.max[a];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

Octree::Octree(Aabb bounds, int depth, std::shared_ptr<const std::vector<std::uint64_t>> codes)
    : bounds_(bounds), depth_(depth), codes_(std::move(codes)) {
  nodes_.push_back(OctreeNode{0, 0, -1, -1, {}});
}

Octree Octree::build(const PointCloud& cloud, const Aabb& bounds, int depth) {
  if (depth < 1 || depth > kMaxOctreeDepth) throw Error("octree depth must be in [1, 21]");
  auto codes = std::make_shared<std::vector<std::uint64_t>>();
  codes->reserve(cloud.size());
  for (const auto& r : cloud.records()) {
    if (!bounds.contains(r.pos)) {
      throw Error("point " + std::to_string(r.id) + " lies outside the octree bounds");
    }
    codes->push_back(encode_morton(r.pos, bounds, depth).bits);
  }
  Octree tree(bounds, depth, codes);
  for (PointId id = 0; id < cloud.size(); ++id) tree.insert_code(id, (*codes)[id], nullptr);
  return tree;
}

void Octree::check_indexed(std::span<const PointId> ids) const {
  for (PointId id : ids) {
    if (!point_index_.contains(id)) {
      throw Error("point " + std::to_string(id) + " is not indexed by the source octree");
    }
  }
}

Octree Octree::prune(std::span<const PointId> kept) const {
  if (kept.empty()) throw Error("cannot prune an octree to an empty point set");
  check_indexed(kept);
  Octree out(bounds_, depth_, codes_);
  for (PointId id : kept) {
    if (!out.point_index_.contains(id)) out.insert_code(id, (*codes_)[id], nullptr);
  }
  return out;
}

Octree Octree::extract_hub(std::span<const PointId> subset_ids) const {
  if (subset_ids.empty()) throw Error("cannot extract a hub octree from an empty subset");
  return prune(subset_ids);
}

std::int32_t Octree::child_with_octant(std::int32_t parent, unsigned octant,
                                       SearchStats* stats) const {
  for (std::int32_t c = nodes_[parent].first_child; c != -1; c = nodes_[c].next_sibling) {
    if (stats) ++stats->nodes_touched;
    const auto child_octant = static_cast<unsigned>(nodes_[c].prefix & 7u);
    if (child_octant == octant) return c;
    if (child_octant > octant) break;  // list is sorted by octant
  }
  return -1;
}

std::int32_t Octree::find_leaf(std::uint64_t code, SearchStats* stats) const {
  if (point_index_.empty()) return -1;
  std::int32_t node = 0;
  if (stats) ++stats->nodes_touched;
  for (int level = 0; level < depth_; ++level) {
    if (stats) ++stats->internal_levels;
    node = child_with_octant(node, octant_at(code, depth_, level), stats);
    if (node == -1) return -1;
  }
  return node;
}

bool Octree::contains(PointId id, SearchStats* stats) const {
  if (id >= codes_->size()) return false;
  const std::int32_t leaf = find_leaf((*codes_)[id], stats);
  if (leaf == -1) return false;
  const auto& pts = nodes_[leaf].points;
  return std::binary_search(pts.begin(), pts.end(), id);
}

void Octree::insert_code(PointId id, std::uint64_t code, SearchStats* stats) {
  std::int32_t node = 0;
  if (stats) ++stats->nodes_touched;
  for (int level = 0; level < depth_; ++level) {
    const unsigned octant = octant_at(code, depth_, level);
    // Find the insertion point in the sorted sibling list.
    std::int32_t prev = -1;
    std::int32_t cur = nodes_[node].first_child;
    while (cur != -1 && (nodes_[cur].prefix & 7u) < octant) {
      if (stats) ++stats->nodes_touched;
      prev = cur;
      cur = nodes_[cur].next_sibling;
    }
    if (cur != -1 && (nodes_[cur].prefix & 7u) == octant) {
      if (stats) ++stats->nodes_touched;
      node = cur;
      continue;
    }
    OctreeNode child;
    child.prefix = (nodes_[node].prefix << 3) | octant;
    child.level = level + 1;
    child.next_sibling = cur;
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(std::move(child));
    if (prev == -1) nodes_[node].first_child = idx;
    else nodes_[prev].next_sibling = idx;
    if (level + 1 == depth_) ++leaf_count_;
    node = idx;
  }
  auto& pts = nodes_[node].points;
  pts.insert(std::upper_bound(pts.begin(), pts.end(), id), id);
  point_index_.emplace(id, node);
}

void Octree::insert(const PointRecord& record, SearchStats* stats) {
  if (point_index_.contains(record.id)) {
    throw Error("point " + std::to_string(record.id) + " is already indexed");
  }
  if (!bounds_.contains(record.pos)) {
    throw Error("point " + std::to_string(record.id) + " lies outside the octree bounds");
  }
  const std::uint64_t code = encode_morton(record.pos, bounds_, depth_).bits;
  if (record.id >= codes_->size() || (*codes_)[record.id] != code) {
    throw Error("point " + std::to_string(record.id) + " does not belong to the indexed cloud");
  }
  insert_code(record.id, code, stats);
}

std::vector<LeafRef> Octree::leaves() const {
  std::vector<LeafRef> out;
  out.reserve(leaf_count_);
  // Depth-first over the sorted sibling lists visits leaves in code order.
  if (point_index_.empty()) return out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t n = stack.back();
    stack.pop_back();
    const auto& node = nodes_[n];
    if (node.level == depth_) {
      out.push_back(LeafRef{MortonCode{node.prefix, depth_}, node.points});
      continue;
    }
    std::vector<std::int32_t> kids;
    for (std::int32_t c = node.first_child; c != -1; c = nodes_[c].next_sibling) kids.push_back(c);
    stack.insert(stack.end(), kids.rbegin(), kids.rend());
  }
  return out;
}

std::vector<PointId> Octree::indexed_ids() const {
  std::vector<PointId> ids;
  ids.reserve(point_index_.size());
  for (const auto& [id, leaf] : point_index_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

MortonCode Octree::code_of(PointId id) const {
  if (id >= codes_->size()) throw Error("point id " + std::to_string(id) + " out of range");
  return MortonCode{(*codes_)[id], depth_};
}

std::int32_t Octree::leaf_of(PointId id) const {
  const auto it = point_index_.find(id);
  return it == point_index_.end() ? -1 : it->second;
}

std::vector<LeafRef> Octree::adjacent_leaves(const MortonCode& seed, unsigned ring) const {
  std::vector<LeafRef> out;
  if (point_index_.empty()) return out;
  const CellIndex c = deinterleave(seed.bits, depth_);
  const std::int64_t cells = std::int64_t{1} << depth_;
  const std::int64_t r = ring;

  auto as_ref = [&](std::int32_t leaf) {
    return LeafRef{MortonCode{nodes_[leaf].prefix, depth_}, nodes_[leaf].points};
  };

  if (ring == 0) {
    const std::int32_t leaf = find_leaf(seed.bits);
    if (leaf != -1) out.push_back(as_ref(leaf));
    return out;
  }
  if (r >= cells) {
    // A shell this wide still reaches the grid only on some faces; fall through
    // to the scan unless it is entirely outside.
    bool reaches = false;
    for (int a = 0; a < 3; ++a) reaches = reaches || c[a] >= r || c[a] + r < cells;
    if (!reaches) return out;
  }

  const std::uint64_t shell_cells = 24ull * static_cast<std::uint64_t>(r * r) + 2;
  if (shell_cells <= leaf_count_) {
    auto in_grid = [&](std::int64_t v) { return v >= 0 && v < cells; };
    for (std::int64_t dx = -r; dx <= r; ++dx) {
      const std::int64_t x = c[0] + dx;
      if (!in_grid(x)) continue;
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        const std::int64_t y = c[1] + dy;
        if (!in_grid(y)) continue;
        const bool on_side = dx == -r || dx == r || dy == -r || dy == r;
        const std::int64_t step = on_side ? 1 : 2 * r;
        for (std::int64_t dz = -r; dz <= r; dz += step) {
          const std::int64_t z = c[2] + dz;
          if (!in_grid(z)) continue;
          const CellIndex cell{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                               static_cast<std::uint32_t>(z)};
          const std::int32_t leaf = find_leaf(interleave(cell, depth_));
          if (leaf != -1) out.push_back(as_ref(leaf));
        }
      }
    }
    std::sort(out.begin(), out.end(),
              [](const LeafRef& a, const LeafRef& b) { return a.code.bits < b.code.bits; });
    return out;
  }

  for (const LeafRef& leaf : leaves()) {
    const CellIndex l = deinterleave(leaf.code.bits, depth_);
    std::int64_t cheb = 0;
    for (int a = 0; a < 3; ++a) {
      cheb = std::max<std::int64_t>(cheb, std::llabs(static_cast<std::int64_t>(l[a]) - c[a]));
    }
    if (cheb == r) out.push_back(leaf);
  }
  return out;
}

std::vector<PointId> Octree::radius_candidates(const Point3& center, double radius) const {
  if (!(radius > 0.0)) throw Error("radius must be positive");
  std::vector<PointId> out;
  if (point_index_.empty()) return out;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t n = stack.back();
    stack.pop_back();
    const auto& node = nodes_[n];
    if (box_distance_sq(node_box(node.prefix, node.level, bounds_), center) > r2) continue;
    if (node.level == depth_) {
      out.insert(out.end(), node.points.begin(), node.points.end());
      continue;
    }
    for (std::int32_t c = node.first_child; c != -1; c = nodes_[c].next_sibling) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Octree::dump() const {
  std::ostringstream os;
  if (point_index_.empty()) return "(empty)\n";
  std::function<void(std::int32_t)> visit = [&](std::int32_t n) {
    const auto& node = nodes_[n];
    os << std::string(2 * node.level, ' ');
    if (node.level == 0) {
      os << "root";
    } else {
      for (int l = node.level - 1; l >= 0; --l) os << ((node.prefix >> (3 * l)) & 7u);
    }
    if (node.level == depth_) {
      os << " [";
      for (std::size_t i = 0; i < node.points.size(); ++i) os << (i ? " " : "") << node.points[i];
      os << "]";
    }
    os << '\n';
    for (std::int32_t c = node.first_child; c != -1; c = nodes_[c].next_sibling) visit(c);
  };
  visit(0);
  return os.str();
}

}  // namespace lpcn
