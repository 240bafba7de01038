#include "lpcn/core.hpp"

#include <algorithm>
#include <cmath>

namespace lpcn {

bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

double distance_sq(const Point3& a, const Point3& b) {
  const double dx = static_cast<double>(a.x) - static_cast<double>(b.x);
  const double dy = static_cast<double>(a.y) - static_cast<double>(b.y);
  const double dz = static_cast<double>(a.z) - static_cast<double>(b.z);
  return dx * dx + dy * dy + dz * dz;
}

PointCloud::PointCloud(std::vector<PointRecord> records, std::size_t feat_dim)
    : records_(std::move(records)), feat_dim_(feat_dim) {
  if (records_.empty()) throw Error("point cloud must contain at least one point");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.id != i) {
      throw Error("point ids must be 0..n-1 in order; record " + std::to_string(i) +
                  " has id " + std::to_string(r.id));
    }
    if (!is_finite(r.pos)) throw Error("point " + std::to_string(i) + " has a non-finite coordinate");
    if (r.feat.size() != feat_dim_) {
      throw Error("point " + std::to_string(i) + " has " + std::to_string(r.feat.size()) +
                  " features, expected " + std::to_string(feat_dim_));
    }
  }
}

const PointRecord& PointCloud::at(PointId id) const {
  if (id >= records_.size()) throw Error("point id " + std::to_string(id) + " out of range");
  return records_[id];
}

bool Aabb::contains(const Point3& p) const {
  for (int a = 0; a < 3; ++a) {
    const double v = p[a];
    if (v < min[a] || v > max[a]) return false;
  }
  return true;
}

Aabb compute_bounds(const PointCloud& cloud) {
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    box.min[a] = std::numeric_limits<double>::infinity();
    box.max[a] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& r : cloud.records()) {
    for (int a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], static_cast<double>(r.pos[a]));
      box.max[a] = std::max(box.max[a], static_cast<double>(r.pos[a]));
    }
  }
  double largest = 0.0;
  for (int a = 0; a < 3; ++a) largest = std::max(largest, box.extent(a));
  const double eps = 1e-6 * (largest > 0.0 ? largest : 1.0);
  for (int a = 0; a < 3; ++a) {
    if (box.extent(a) <= 0.0) {
      box.min[a] -= eps;
      box.max[a] += eps;
    }
  }
  return box;
}

const char* to_string(ReuseMode mode) {
  switch (mode) {
    case ReuseMode::kBaseline: return "baseline";
    case ReuseMode::kExactReuse: return "exact";
    case ReuseMode::kCompensatedReuse: return "compensated";
  }
  return "unknown";
}

ReuseMode parse_reuse_mode(const std::string& text) {
  if (text == "baseline") return ReuseMode::kBaseline;
  if (text == "exact" || text == "exact_reuse") return ReuseMode::kExactReuse;
  if (text == "compensated" || text == "compensated_reuse") return ReuseMode::kCompensatedReuse;
  throw Error("unknown reuse mode '" + text + "' (expected baseline|exact|compensated)");
}

void RunConfig::validate(std::size_t n) const {
  if (subset_size == 0) throw Error("subset size K must be positive");
  if (num_centrals == 0) throw Error("number of centrals M must be positive");
  if (num_centrals > n) {
    throw Error("number of centrals M=" + std::to_string(num_centrals) +
                " exceeds cloud size n=" + std::to_string(n));
  }
  if (island_size == 0) throw Error("island size S must be positive");
  if (hub_cache_entries < subset_size) {
    throw Error("hub cache capacity C=" + std::to_string(hub_cache_entries) +
                " is smaller than K=" + std::to_string(subset_size));
  }
  if (octree_depth < 1 || octree_depth > 21) throw Error("octree depth must be in [1, 21]");
  if (neighbor_method == NeighborMethod::kKnn && subset_size > n) {
    throw Error("knn needs K <= n, got K=" + std::to_string(subset_size) +
                " for n=" + std::to_string(n));
  }
  if (neighbor_method == NeighborMethod::kBallQuery && !(ball_radius > 0.0)) {
    throw Error("ball query radius must be positive");
  }
}

}  // namespace lpcn
