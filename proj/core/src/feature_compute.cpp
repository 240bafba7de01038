#include "lpcn/feature_compute.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "lpcn/rng.hpp"

namespace lpcn {

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error("model needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.in_dim == 0 || l.out_dim == 0) throw Error("layer " + std::to_string(i) + " has a zero dimension");
    if (l.weights.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim) {
      throw Error("layer " + std::to_string(i) + " parameter sizes do not match its shape");
    }
    if (i > 0 && layers_[i - 1].out_dim != l.in_dim) {
      throw Error("layer " + std::to_string(i) + " input " + std::to_string(l.in_dim) +
                  " does not chain with previous output " + std::to_string(layers_[i - 1].out_dim));
    }
    for (float w : l.weights) {
      if (!std::isfinite(w)) throw Error("layer " + std::to_string(i) + " has a non-finite weight");
    }
    for (float b : l.bias) {
      if (!std::isfinite(b)) throw Error("layer " + std::to_string(i) + " has a non-finite bias");
    }
  }
}

MlpModel MlpModel::random(const ModelSpec& spec) {
  if (spec.layers.empty()) throw Error("model spec has no layers");
  Rng rng = Rng::stream(spec.seed, streams::kModel);
  std::vector<DenseLayer> layers;
  for (const auto& ls : spec.layers) {
    DenseLayer l;
    l.in_dim = ls.in_dim;
    l.out_dim = ls.out_dim;
    l.activation = ls.activation;
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(ls.in_dim, 1)));
    l.weights.resize(ls.in_dim * ls.out_dim);
    for (auto& w : l.weights) w = static_cast<float>(rng.uniform(-0.5, 0.5) * scale);
    l.bias.resize(ls.out_dim);
    for (auto& b : l.bias) b = static_cast<float>(rng.uniform(-0.5, 0.5) * scale);
    layers.push_back(std::move(l));
  }
  return MlpModel(std::move(layers));
}

std::uint64_t MlpModel::macs_per_point() const {
  std::uint64_t macs = 0;
  for (const auto& l : layers_) macs += static_cast<std::uint64_t>(l.in_dim) * l.out_dim;
  return macs;
}

std::uint64_t MlpModel::parameter_count() const {
  std::uint64_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

bool MlpModel::has_hidden_activation() const {
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    if (layers_[i].activation != Activation::kNone) return true;
  }
  return false;
}

ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_seed = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto fail = [&](const std::string& why) {
      return Error("model spec line " + std::to_string(line_no) + ": " + why);
    };
    if (key == "seed") {
      if (!(ls >> spec.seed)) throw fail("expected 'seed <unsigned>'");
      have_seed = true;
    } else if (key == "layer") {
      LayerSpec l;
      std::string act;
      if (!(ls >> l.in_dim >> l.out_dim >> act)) throw fail("expected 'layer <in> <out> <none|relu>'");
      if (act == "relu") l.activation = Activation::kRelu;
      else if (act == "none") l.activation = Activation::kNone;
      else throw fail("unknown activation '" + act + "'");
      if (l.in_dim == 0 || l.out_dim == 0) throw fail("layer dimensions must be positive");
      if (!spec.layers.empty() && spec.layers.back().out_dim != l.in_dim) {
        throw fail("layer input does not chain with previous output");
      }
      spec.layers.push_back(l);
    } else {
      throw fail("unknown key '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) throw fail("trailing token '" + extra + "'");
  }
  if (!have_seed) throw Error("model spec is missing a 'seed' line");
  if (spec.layers.empty()) throw Error("model spec has no layers");
  return spec;
}

std::string format_model_spec(const ModelSpec& spec) {
  std::ostringstream os;
  os << "seed " << spec.seed << '\n';
  for (const auto& l : spec.layers) {
    os << "layer " << l.in_dim << ' ' << l.out_dim << ' '
       << (l.activation == Activation::kRelu ? "relu" : "none") << '\n';
  }
  return os.str();
}

std::vector<double> normalized_row(const PointCloud& cloud, PointId point, PointId central) {
  const PointRecord& p = cloud.at(point);
  const PointRecord& c = cloud.at(central);
  std::vector<double> row(3 + cloud.feat_dim());
  for (int a = 0; a < 3; ++a) row[a] = static_cast<double>(p.pos[a]) - static_cast<double>(c.pos[a]);
  for (std::size_t f = 0; f < cloud.feat_dim(); ++f) row[3 + f] = p.feat[f];
  return row;
}

FeatureMatrix normalize_subset(const PointCloud& cloud, const PointSubset& subset) {
  FeatureMatrix fm(subset.size(), 3 + cloud.feat_dim());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    const auto row = normalized_row(cloud, subset.member_ids[r], subset.central_id);
    std::copy(row.begin(), row.end(), fm.row(r).begin());
  }
  return fm;
}

void apply_activation(Activation act, std::span<double> values) {
  if (act == Activation::kRelu) {
    for (double& v : values) v = std::max(v, 0.0);
  }
}

namespace {

// out = in * W (+ bias), accumulated in double.
void dense(const DenseLayer& l, std::span<const double> in, std::span<double> out, bool with_bias) {
  for (std::size_t o = 0; o < l.out_dim; ++o) out[o] = with_bias ? static_cast<double>(l.bias[o]) : 0.0;
  for (std::size_t i = 0; i < l.in_dim; ++i) {
    const double x = in[i];
    const float* w = l.weights.data() + i * l.out_dim;
    for (std::size_t o = 0; o < l.out_dim; ++o) out[o] += x * static_cast<double>(w[o]);
  }
}

}  // namespace

std::vector<double> mlp_forward_row(const MlpModel& model, std::span<const double> input,
                                    bool apply_final_activation) {
  if (input.size() != model.input_dim()) {
    throw Error("model expects input dimension " + std::to_string(model.input_dim()) + ", got " +
                std::to_string(input.size()));
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  const auto layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    next.assign(layers[i].out_dim, 0.0);
    dense(layers[i], cur, next, true);
    if (i + 1 < layers.size() || apply_final_activation) apply_activation(layers[i].activation, next);
    cur.swap(next);
  }
  return cur;
}

FeatureMatrix mlp_forward(const MlpModel& model, const FeatureMatrix& input, bool apply_final_activation) {
  if (input.cols != model.input_dim()) {
    throw Error("model expects input dimension " + std::to_string(model.input_dim()) + ", got " +
                std::to_string(input.cols));
  }
  FeatureMatrix out(input.rows, model.output_dim());
  for (std::size_t r = 0; r < input.rows; ++r) {
    const auto row = mlp_forward_row(model, input.row(r), apply_final_activation);
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

std::vector<double> linearized_delta(const MlpModel& model, std::span<const double> delta_xyz) {
  if (delta_xyz.size() != 3) throw Error("delta must have three coordinates");
  if (model.input_dim() < 3) throw Error("model input must carry the three coordinate channels");
  std::vector<double> cur(model.input_dim(), 0.0);
  std::copy(delta_xyz.begin(), delta_xyz.end(), cur.begin());
  std::vector<double> next;
  for (const auto& l : model.layers()) {
    next.assign(l.out_dim, 0.0);
    dense(l, cur, next, false);
    cur.swap(next);
  }
  return cur;
}

std::vector<double> linearized_delta(const MlpModel& model, const Point3& delta) {
  const double d[3] = {delta.x, delta.y, delta.z};
  return linearized_delta(model, std::span<const double>(d, 3));
}

std::vector<double> delta_compensate(std::span<const double> cached, const MlpModel& model,
                                     std::span<const double> delta_xyz) {
  if (cached.size() != model.output_dim()) {
    throw Error("cached result has dimension " + std::to_string(cached.size()) + ", model outputs " +
                std::to_string(model.output_dim()));
  }
  std::vector<double> out(cached.begin(), cached.end());
  const auto adj = linearized_delta(model, delta_xyz);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += adj[i];
  return out;
}

std::vector<double> max_pool(const FeatureMatrix& fm) {
  if (fm.rows == 0) throw Error("cannot pool an empty matrix");
  std::vector<double> out(fm.row(0).begin(), fm.row(0).end());
  for (std::size_t r = 1; r < fm.rows; ++r) {
    for (std::size_t c = 0; c < fm.cols; ++c) out[c] = std::max(out[c], fm(r, c));
  }
  return out;
}

ReuseErrorReport reuse_error_report(std::span<const SubsetResult> baseline,
                                    std::span<const SubsetResult> optimized) {
  if (baseline.size() != optimized.size()) {
    throw Error("reuse error report needs runs over the same centrals");
  }
  std::map<PointId, const SubsetResult*> by_central;
  for (const auto& r : optimized) by_central.emplace(r.central_id, &r);

  ReuseErrorReport report;
  report.per_subset_max_rel_error.reserve(baseline.size());
  double sum = 0.0;
  std::size_t reused = 0;
  std::size_t entries = 0;
  for (const auto& base : baseline) {
    const auto it = by_central.find(base.central_id);
    if (it == by_central.end() || it->second->pooled.size() != base.pooled.size()) {
      throw Error("central " + std::to_string(base.central_id) + " missing or mismatched in optimized run");
    }
    const auto& opt = *it->second;
    double scale = 1e-12;
    double diff = 0.0;
    for (std::size_t c = 0; c < base.pooled.size(); ++c) {
      scale = std::max(scale, std::abs(base.pooled[c]));
      diff = std::max(diff, std::abs(opt.pooled[c] - base.pooled[c]));
    }
    const double rel = diff / scale;
    report.per_subset_max_rel_error.push_back(rel);
    report.max_rel_error = std::max(report.max_rel_error, rel);
    sum += rel;
    reused += opt.reused_argmax_channels;
    entries += opt.pooled.size();
  }
  if (!baseline.empty()) report.mean_rel_error = sum / static_cast<double>(baseline.size());
  if (entries > 0) report.reused_argmax_fraction = static_cast<double>(reused) / static_cast<double>(entries);
  return report;
}

}  // namespace lpcn
