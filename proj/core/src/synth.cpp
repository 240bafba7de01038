#include "lpcn/synth.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "lpcn/rng.hpp"

namespace lpcn {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw Error("cloud spec: bad " + what + " '" + s + "'");
  }
  if (pos != s.size() || s.empty() || s[0] == '-') throw Error("cloud spec: bad " + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error("cloud spec: bad " + what + " '" + s + "'");
  }
  if (pos != s.size()) throw Error("cloud spec: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

void CloudSpec::validate() const {
  if (kind == CloudKind::kGrid) {
    if (nx == 0 || ny == 0 || nz == 0) throw Error("grid dimensions must be positive");
  } else if (n == 0) {
    throw Error("cloud must have at least one point");
  }
  if (kind == CloudKind::kGaussianClusters && (clusters == 0 || !(sigma > 0.0))) {
    throw Error("gaussian clusters need k > 0 and sigma > 0");
  }
}

CloudSpec parse_cloud_spec(const std::string& text, std::size_t feat_dim, std::uint64_t seed) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw Error("empty cloud spec");
  CloudSpec spec;
  spec.feat_dim = feat_dim;
  spec.seed = seed;
  const std::string& kind = parts[0];
  auto expect = [&](std::size_t count) {
    if (parts.size() != count) {
      throw Error("cloud spec '" + text + "': expected " + std::to_string(count - 1) + " parameters");
    }
  };
  if (kind == "uniform_cube" || kind == "cube") {
    expect(2);
    spec.kind = CloudKind::kUniformCube;
    spec.n = parse_count(parts[1], "point count");
  } else if (kind == "sphere_surface" || kind == "sphere") {
    expect(2);
    spec.kind = CloudKind::kSphereSurface;
    spec.n = parse_count(parts[1], "point count");
  } else if (kind == "gaussian_clusters" || kind == "clusters") {
    expect(4);
    spec.kind = CloudKind::kGaussianClusters;
    spec.n = parse_count(parts[1], "point count");
    spec.clusters = parse_count(parts[2], "cluster count");
    spec.sigma = parse_real(parts[3], "sigma");
  } else if (kind == "grid") {
    expect(4);
    spec.kind = CloudKind::kGrid;
    spec.nx = parse_count(parts[1], "nx");
    spec.ny = parse_count(parts[2], "ny");
    spec.nz = parse_count(parts[3], "nz");
    spec.n = spec.nx * spec.ny * spec.nz;
  } else {
    throw Error("unknown cloud kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

PointCloud generate(const CloudSpec& spec) {
  spec.validate();
  Rng rng = Rng::stream(spec.seed, streams::kSynth);
  std::vector<PointRecord> records;

  auto add = [&](double x, double y, double z) {
    PointRecord r;
    r.id = static_cast<PointId>(records.size());
    r.pos = Point3{static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)};
    records.push_back(std::move(r));
  };

  switch (spec.kind) {
    case CloudKind::kUniformCube:
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
        add(x, y, z);
      }
      break;
    case CloudKind::kSphereSurface:
      for (std::size_t i = 0; i < spec.n; ++i) {
        double v[3];
        double norm = 0.0;
        do {
          for (double& c : v) c = rng.normal();
          norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        } while (norm < 1e-12);
        add(v[0] / norm, v[1] / norm, v[2] / norm);
      }
      break;
    case CloudKind::kGaussianClusters: {
      std::vector<std::array<double, 3>> centers(spec.clusters);
      for (auto& c : centers) {
        for (double& v : c) v = rng.uniform();
      }
      for (std::size_t i = 0; i < spec.n; ++i) {
        const auto& c = centers[rng.below(spec.clusters)];
        const double x = c[0] + spec.sigma * rng.normal();
        const double y = c[1] + spec.sigma * rng.normal();
        const double z = c[2] + spec.sigma * rng.normal();
        add(x, y, z);
      }
      break;
    }
    case CloudKind::kGrid:
      for (std::size_t z = 0; z < spec.nz; ++z) {
        for (std::size_t y = 0; y < spec.ny; ++y) {
          for (std::size_t x = 0; x < spec.nx; ++x) add(double(x), double(y), double(z));
        }
      }
      break;
  }

  for (auto& r : records) {
    r.feat.resize(spec.feat_dim);
    for (auto& f : r.feat) f = static_cast<float>(rng.uniform());
  }
  return PointCloud(std::move(records), spec.feat_dim);
}

}  // namespace lpcn
