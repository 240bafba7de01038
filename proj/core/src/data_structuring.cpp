#include "lpcn/data_structuring.hpp"

#include <algorithm>
#include <queue>
#include <utility>

#include "lpcn/rng.hpp"

namespace lpcn {

namespace {

struct Candidate {
  double d2;
  PointId id;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && id < o.id); }
};

double box_distance_sq(const Aabb& box, const Point3& p) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double v = p[a];
    const double d = v < box.min[a] ? box.min[a] - v : (v > box.max[a] ? v - box.max[a] : 0.0);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

std::size_t PointSubset::distinct_count() const {
  std::vector<PointId> ids = member_ids;
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

std::vector<PointId> farthest_point_sampling(const PointCloud& cloud, std::size_t m, PointId start) {
  const std::size_t n = cloud.size();
  if (m == 0 || m > n) throw Error("farthest point sampling needs 1 <= m <= n");
  if (start >= n) throw Error("farthest point sampling start id out of range");

  std::vector<PointId> chosen;
  chosen.reserve(m);
  chosen.push_back(start);
  // Chosen points sit at -1 so they are never picked again, even when the
  // cloud holds coincident points at distance 0.
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  min_d2[start] = -1.0;
  PointId last = start;
  while (chosen.size() < m) {
    const Point3& lp = cloud[last].pos;
    PointId best = 0;
    double best_d2 = -1.0;
    for (PointId i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], distance_sq(cloud[i].pos, lp));
      if (min_d2[i] > best_d2) {  // strict: earlier (lower) id wins ties
        best_d2 = min_d2[i];
        best = i;
      }
    }
    chosen.push_back(best);
    min_d2[best] = -1.0;
    last = best;
  }
  return chosen;
}

std::vector<PointId> farthest_point_sampling(const PointCloud& cloud, std::size_t m,
                                             std::uint64_t seed) {
  Rng rng = Rng::stream(seed, streams::kSampling);
  const auto start = static_cast<PointId>(rng.below(cloud.size()));
  return farthest_point_sampling(cloud, m, start);
}

PointSubset ball_query(const PointCloud& cloud, const Octree& octree, PointId center_id,
                       double radius, std::size_t k) {
  if (!(radius > 0.0)) throw Error("ball query radius must be positive");
  if (k == 0) throw Error("subset size K must be positive");
  const Point3& c = cloud.at(center_id).pos;
  const double r2 = radius * radius;

  std::vector<Candidate> inside;
  for (PointId id : octree.radius_candidates(c, radius)) {
    if (id == center_id) continue;
    const double d2 = distance_sq(cloud[id].pos, c);
    if (d2 <= r2) inside.push_back({d2, id});
  }
  const std::size_t take = std::min(inside.size(), k - 1);
  std::partial_sort(inside.begin(), inside.begin() + static_cast<std::ptrdiff_t>(take), inside.end());

  PointSubset subset{center_id, {}};
  subset.member_ids.reserve(k);
  subset.member_ids.push_back(center_id);
  for (std::size_t i = 0; i < take; ++i) subset.member_ids.push_back(inside[i].id);
  subset.member_ids.resize(k, center_id);
  return subset;
}

PointSubset knn(const PointCloud& cloud, const Octree& octree, PointId center_id, std::size_t k) {
  if (k == 0) throw Error("subset size K must be positive");
  if (k > cloud.size()) {
    throw Error("knn needs K <= n, got K=" + std::to_string(k) + " for n=" + std::to_string(cloud.size()));
  }
  const Point3& c = cloud.at(center_id).pos;
  const std::size_t want = k - 1;

  // Max-heap of the best `want` candidates so far (worst on top).
  std::priority_queue<Candidate> best;
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  const auto nodes = octree.nodes();
  if (want > 0) frontier.push({0.0, 0});
  while (!frontier.empty()) {
    const auto [node_d2, n] = frontier.top();
    // A node at exactly the current worst distance may still hold a lower id.
    if (best.size() == want && node_d2 > best.top().d2) break;
    frontier.pop();
    const OctreeNode& node = nodes[static_cast<std::size_t>(n)];
    if (node.level == octree.depth()) {
      for (PointId id : node.points) {
        if (id == center_id) continue;
        const Candidate cand{distance_sq(cloud[id].pos, c), id};
        if (best.size() < want) {
          best.push(cand);
        } else if (cand < best.top()) {
          best.pop();
          best.push(cand);
        }
      }
      continue;
    }
    for (std::int32_t ch = node.first_child; ch != -1; ch = nodes[static_cast<std::size_t>(ch)].next_sibling) {
      const OctreeNode& child = nodes[static_cast<std::size_t>(ch)];
      frontier.push({box_distance_sq(node_box(child.prefix, child.level, octree.bounds()), c), ch});
    }
  }

  std::vector<Candidate> picked;
  picked.reserve(best.size());
  while (!best.empty()) {
    picked.push_back(best.top());
    best.pop();
  }
  std::sort(picked.begin(), picked.end());
  PointSubset subset{center_id, {center_id}};
  subset.member_ids.reserve(k);
  for (const auto& cand : picked) subset.member_ids.push_back(cand.id);
  if (subset.member_ids.size() != k) {
    throw Error("octree does not index enough points for knn with K=" + std::to_string(k));
  }
  return subset;
}

StructuredCloud structure(std::shared_ptr<const PointCloud> cloud, const Octree& input_octree,
                          const RunConfig& config) {
  if (!cloud) throw Error("structure() needs a cloud");
  config.validate(cloud->size());
  if (input_octree.size() != cloud->size()) {
    throw Error("input octree must index every point of the cloud");
  }
  auto centrals = farthest_point_sampling(*cloud, config.num_centrals, config.seed);
  std::vector<PointSubset> subsets;
  subsets.reserve(centrals.size());
  for (PointId c : centrals) {
    if (config.neighbor_method == NeighborMethod::kKnn) {
      subsets.push_back(knn(*cloud, input_octree, c, config.subset_size));
    } else {
      subsets.push_back(ball_query(*cloud, input_octree, c, config.ball_radius, config.subset_size));
    }
  }
  Octree sampled = input_octree.prune(centrals);
  return StructuredCloud{std::move(cloud), std::move(centrals), std::move(subsets), std::move(sampled)};
}

}  // namespace lpcn
