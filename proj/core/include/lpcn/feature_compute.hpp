#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lpcn/core.hpp"
#include "lpcn/data_structuring.hpp"

namespace lpcn {

enum class Activation { kNone, kRelu };

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<float> weights;  // row-major, in_dim x out_dim
  std::vector<float> bias;     // out_dim
  Activation activation = Activation::kNone;

  float weight(std::size_t i, std::size_t o) const { return weights[i * out_dim + o]; }
};

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kNone;
  bool operator==(const LayerSpec&) const = default;
};

/// Layer shapes plus the seed the weights are drawn from. Enough to rebuild a
/// model bit-identically.
struct ModelSpec {
  std::vector<LayerSpec> layers;
  std::uint64_t seed = 0;
  bool operator==(const ModelSpec&) const = default;
};

/// Shared per-point MLP. Immutable; forwards are pure.
class MlpModel {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// Weights and biases uniform in [-0.5, 0.5] / sqrt(in_dim).
  static MlpModel random(const ModelSpec& spec);

  std::span<const DenseLayer> layers() const { return layers_; }
  std::size_t input_dim() const { return layers_.front().in_dim; }
  std::size_t output_dim() const { return layers_.back().out_dim; }
  /// Sum over layers of in_dim * out_dim.
  std::uint64_t macs_per_point() const;
  /// Weights plus biases.
  std::uint64_t parameter_count() const;
  bool has_hidden_activation() const;
  Activation final_activation() const { return layers_.back().activation; }

 private:
  std::vector<DenseLayer> layers_;
};

/// Text form:
///   seed <n>
///   layer <in> <out> <none|relu>
/// Lines starting with '#' and blank lines are ignored.
ModelSpec parse_model_spec(const std::string& text);
std::string format_model_spec(const ModelSpec& spec);

/// Row-major K x D matrix of per-point values.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
};

/// Row per member: [x - x_c, y - y_c, z - z_c, f_1 .. f_F].
FeatureMatrix normalize_subset(const PointCloud& cloud, const PointSubset& subset);

/// Input row for one point normalized against `central`.
std::vector<double> normalized_row(const PointCloud& cloud, PointId point, PointId central);

/// Per-row forward through every layer. With `apply_final_activation` false
/// the last layer's activation is skipped (pre-activation output).
FeatureMatrix mlp_forward(const MlpModel& model, const FeatureMatrix& input,
                          bool apply_final_activation = true);

std::vector<double> mlp_forward_row(const MlpModel& model, std::span<const double> input,
                                    bool apply_final_activation = true);

/// Weights-only (no bias, no activation) forward of [dx, dy, dz, 0, ..., 0].
std::vector<double> linearized_delta(const MlpModel& model, const Point3& delta);
std::vector<double> linearized_delta(const MlpModel& model, std::span<const double> delta_xyz);

/// cached + linearized_delta(delta). Exact recomputation for models without
/// activations; an approximation otherwise.
std::vector<double> delta_compensate(std::span<const double> cached, const MlpModel& model,
                                     std::span<const double> delta_xyz);

void apply_activation(Activation act, std::span<double> values);

/// Columnwise maximum. Throws Error on an empty matrix.
std::vector<double> max_pool(const FeatureMatrix& fm);

/// Pooled output of one subset.
struct SubsetResult {
  PointId central_id = 0;
  std::vector<double> pooled;
  /// Output channels whose max came from a reused (cache-hit) row.
  std::size_t reused_argmax_channels = 0;
  bool operator==(const SubsetResult&) const = default;
};

struct ReuseErrorReport {
  std::vector<double> per_subset_max_rel_error;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  /// Fraction of pooled entries (over all subsets and channels) whose max came
  /// from an approximated vector.
  double reused_argmax_fraction = 0.0;
};

/// Relative error per subset is max_c |opt_c - base_c| / max(max_c |base_c|, 1e-12).
/// Results are matched by central id; both runs must cover the same centrals.
ReuseErrorReport reuse_error_report(std::span<const SubsetResult> baseline,
                                    std::span<const SubsetResult> optimized);

}  // namespace lpcn
