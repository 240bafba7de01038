#pragma once

#include <cstdint>
#include <string>

#include "lpcn/core.hpp"

namespace lpcn {

enum class CloudKind { kUniformCube, kSphereSurface, kGaussianClusters, kGrid };

struct CloudSpec {
  CloudKind kind = CloudKind::kSphereSurface;
  std::size_t n = 1024;     // ignored for grids (n = nx * ny * nz)
  std::size_t feat_dim = 3;
  std::uint64_t seed = 1;
  std::size_t clusters = 8;  // gaussian_clusters
  double sigma = 0.05;       // gaussian_clusters
  std::size_t nx = 0, ny = 0, nz = 0;  // grid

  /// Throws Error on non-positive parameters.
  void validate() const;
};

/// Accepted forms:
///   uniform_cube:<n>
///   sphere_surface:<n>
///   gaussian_clusters:<n>:<k>:<sigma>
///   grid:<nx>:<ny>:<nz>
/// The feature width and seed are supplied separately.
CloudSpec parse_cloud_spec(const std::string& text, std::size_t feat_dim, std::uint64_t seed);

/// Deterministic under `spec.seed`. Features are uniform in [0, 1). Grid
/// points sit on the integer lattice with x varying fastest.
PointCloud generate(const CloudSpec& spec);

}  // namespace lpcn
