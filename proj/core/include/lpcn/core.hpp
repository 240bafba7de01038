#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpcn {

using PointId = std::uint32_t;

/// Raised for any contract violation on inputs (bad config, out-of-bounds
/// point, malformed file). Callers at the CLI boundary turn it into a
/// one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point3 {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Point3&) const = default;
};

bool is_finite(const Point3& p);

/// Squared Euclidean distance, evaluated in double from the float inputs.
double distance_sq(const Point3& a, const Point3& b);

struct PointRecord {
  PointId id = 0;
  Point3 pos;
  std::vector<float> feat;
  bool operator==(const PointRecord&) const = default;
};

/// Points with ids exactly 0..n-1 (record i has id i) and a common feature
/// width. Immutable once constructed.
class PointCloud {
 public:
  PointCloud(std::vector<PointRecord> records, std::size_t feat_dim);

  std::size_t size() const { return records_.size(); }
  std::size_t feat_dim() const { return feat_dim_; }
  const PointRecord& operator[](PointId id) const { return records_[id]; }
  const PointRecord& at(PointId id) const;
  std::span<const PointRecord> records() const { return records_; }

  bool operator==(const PointCloud&) const = default;

 private:
  std::vector<PointRecord> records_;
  std::size_t feat_dim_;
};

/// Axis-aligned box, kept in double so quantization at the octree depth is
/// not limited by float resolution of the padded bounds.
struct Aabb {
  double min[3] = {0.0, 0.0, 0.0};
  double max[3] = {0.0, 0.0, 0.0};

  double extent(int axis) const { return max[axis] - min[axis]; }
  bool contains(const Point3& p) const;
  bool operator==(const Aabb&) const = default;
};

/// Box containing every point. Axes with zero extent are padded on both
/// sides by 1e-6 times the largest extent (or 1.0 when all axes collapse).
Aabb compute_bounds(const PointCloud& cloud);

enum class NeighborMethod { kBallQuery, kKnn };

enum class ReuseMode { kBaseline, kExactReuse, kCompensatedReuse };

const char* to_string(ReuseMode mode);
ReuseMode parse_reuse_mode(const std::string& text);

inline constexpr std::size_t kUnboundedCache = std::numeric_limits<std::size_t>::max();

struct RunConfig {
  std::size_t subset_size = 32;      // K
  std::size_t num_centrals = 512;    // M
  std::size_t island_size = 32;      // S, subsets per island target
  std::size_t hub_cache_entries = 64;  // C, defaults to 2K
  NeighborMethod neighbor_method = NeighborMethod::kKnn;
  double ball_radius = 0.0;
  int octree_depth = 6;
  std::uint64_t seed = 1;
  ReuseMode reuse_mode = ReuseMode::kCompensatedReuse;
  bool parallel_islands = false;

  /// Throws Error if the config cannot run on a cloud of `n` points.
  void validate(std::size_t n) const;
};

}  // namespace lpcn
