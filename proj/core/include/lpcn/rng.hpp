#pragma once

#include <cstdint>
#include <random>

namespace lpcn {

/// Seeded generator used for every random draw in the pipeline.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The conversions to reals and bounded integers are done here
/// rather than with <random> distributions, whose algorithms are
/// implementation-defined; this keeps outputs identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent generator for a named stage, derived from the same seed.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace streams {
inline constexpr std::uint64_t kSampling = 1;
inline constexpr std::uint64_t kHubs = 2;
inline constexpr std::uint64_t kModel = 3;
inline constexpr std::uint64_t kSynth = 4;
}  // namespace streams

}  // namespace lpcn
