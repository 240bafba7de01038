#pragma once

#include <array>
#include <cstdint>

#include "lpcn/core.hpp"

namespace lpcn {

inline constexpr int kMaxOctreeDepth = 21;

/// Interleaved cell address of a leaf voxel at `depth`. Within each 3-bit
/// group the x bit is lowest, then y, then z; the most significant group
/// selects the top-level octant.
struct MortonCode {
  std::uint64_t bits = 0;
  int depth = 0;

  bool operator==(const MortonCode&) const = default;
};

using CellIndex = std::array<std::uint32_t, 3>;

std::uint64_t interleave(const CellIndex& cell, int depth);
CellIndex deinterleave(std::uint64_t bits, int depth);

/// Quantized cell of `p` at `depth`: floor((p - min) / extent * 2^depth),
/// clamped to 2^depth - 1 so the max face lands in the last cell.
/// Throws Error when p lies outside `bounds`.
CellIndex quantize(const Point3& p, const Aabb& bounds, int depth);

MortonCode encode_morton(const Point3& p, const Aabb& bounds, int depth);

/// Voxel box of the leaf cell addressed by `code`.
Aabb decode_morton(const MortonCode& code, const Aabb& bounds);

/// Box of the node whose code prefix is `prefix` at `level` (0 = root).
Aabb node_box(std::uint64_t prefix, int level, const Aabb& bounds);

}  // namespace lpcn
