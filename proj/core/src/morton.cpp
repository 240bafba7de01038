#include "lpcn/morton.hpp"

#include <cmath>

namespace lpcn {

std::uint64_t interleave(const CellIndex& cell, int depth) {
  std::uint64_t bits = 0;
  for (int b = 0; b < depth; ++b) {
    for (int a = 0; a < 3; ++a) {
      bits |= static_cast<std::uint64_t>((cell[a] >> b) & 1u) << (3 * b + a);
    }
  }
  return bits;
}

CellIndex deinterleave(std::uint64_t bits, int depth) {
  CellIndex cell{0, 0, 0};
  for (int b = 0; b < depth; ++b) {
    for (int a = 0; a < 3; ++a) {
      cell[a] |= static_cast<std::uint32_t>((bits >> (3 * b + a)) & 1u) << b;
    }
  }
  return cell;
}

CellIndex quantize(const Point3& p, const Aabb& bounds, int depth) {
  if (depth < 1 || depth > kMaxOctreeDepth) throw Error("octree depth must be in [1, 21]");
  if (!bounds.contains(p)) throw Error("point lies outside the octree bounds");
  const double cells = std::ldexp(1.0, depth);
  const auto last = static_cast<std::uint32_t>(cells) - 1u;
  CellIndex cell{};
  for (int a = 0; a < 3; ++a) {
    const double t = (static_cast<double>(p[a]) - bounds.min[a]) / bounds.extent(a) * cells;
    const double f = std::floor(t);
    cell[a] = f >= static_cast<double>(last) ? last : static_cast<std::uint32_t>(f);
  }
  return cell;
}

MortonCode encode_morton(const Point3& p, const Aabb& bounds, int depth) {
  return MortonCode{interleave(quantize(p, bounds, depth), depth), depth};
}

Aabb node_box(std::uint64_t prefix, int level, const Aabb& bounds) {
  const CellIndex cell = deinterleave(prefix, level);
  const double cells = std::ldexp(1.0, level);
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    const double size = bounds.extent(a) / cells;
    box.min[a] = bounds.min[a] + size * cell[a];
    box.max[a] = cell[a] + 1 == static_cast<std::uint32_t>(cells) ? bounds.max[a]
                                                                   : bounds.min[a] + size * (cell[a] + 1);
  }
  return box;
}

Aabb decode_morton(const MortonCode& code, const Aabb& bounds) {
  return node_box(code.bits, code.depth, bounds);
}

}  // namespace lpcn
