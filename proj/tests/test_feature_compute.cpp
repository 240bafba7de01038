#include <gtest/gtest.h>

#include <cmath>

#include "lpcn/feature_compute.hpp"
#include "test_support.hpp"

using namespace lpcn;
using test::model_of;

namespace {

FeatureMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix fm(r, c);
  for (double& v : fm.values) v = rng.uniform(-1, 1);
  return fm;
}

DenseLayer identity(std::size_t n) {
  DenseLayer l;
  l.in_dim = l.out_dim = n;
  l.weights.assign(n * n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) l.weights[i * n + i] = 1.0f;
  l.bias.assign(n, 0.0f);
  return l;
}

}  // namespace

TEST(Model, ShapesAndCounts) {
  const auto m = model_of({{6, 64, Activation::kRelu}, {64, 64, Activation::kRelu}, {64, 128, Activation::kRelu}}, 1);
  EXPECT_EQ(m.input_dim(), 6u);
  EXPECT_EQ(m.output_dim(), 128u);
  EXPECT_EQ(m.macs_per_point(), 6u * 64 + 64u * 64 + 64u * 128);
  EXPECT_EQ(m.parameter_count(), 6u * 64 + 64 + 64u * 64 + 64 + 64u * 128 + 128);
  EXPECT_TRUE(m.has_hidden_activation());
  const auto end_only = model_of({{6, 8, Activation::kNone}, {8, 4, Activation::kRelu}}, 1);
  EXPECT_FALSE(end_only.has_hidden_activation());
  EXPECT_EQ(end_only.final_activation(), Activation::kRelu);
}

TEST(Model, RandomWeightsInRangeAndSeeded) {
  const auto a = model_of({{10, 20, Activation::kNone}}, 4);
  const auto b = model_of({{10, 20, Activation::kNone}}, 4);
  const auto c = model_of({{10, 20, Activation::kNone}}, 5);
  const double bound = 0.5 / std::sqrt(10.0);
  for (float w : a.layers()[0].weights) {
    EXPECT_LE(std::abs(w), bound + 1e-7);
  }
  EXPECT_EQ(a.layers()[0].weights, b.layers()[0].weights);
  EXPECT_NE(a.layers()[0].weights, c.layers()[0].weights);
}

TEST(Model, RejectsBadShapes) {
  EXPECT_THROW(MlpModel({}), Error);
  auto l1 = identity(3);
  auto l2 = identity(4);
  EXPECT_THROW(MlpModel({l1, l2}), Error);
  l1.bias.pop_back();
  EXPECT_THROW(MlpModel({l1}), Error);
  auto l3 = identity(3);
  l3.weights[0] = NAN;
  EXPECT_THROW(MlpModel({l3}), Error);
}

TEST(ModelSpec, ParseAndFormat) {
  const std::string text = "# toy\nseed 42\nlayer 6 16 relu\n\nlayer 16 8 none\n";
  const auto spec = parse_model_spec(text);
  EXPECT_EQ(spec.seed, 42u);
  ASSERT_EQ(spec.layers.size(), 2u);
  EXPECT_EQ(spec.layers[0], (LayerSpec{6, 16, Activation::kRelu}));
  EXPECT_EQ(spec.layers[1], (LayerSpec{16, 8, Activation::kNone}));
  EXPECT_EQ(parse_model_spec(format_model_spec(spec)), spec);
}

TEST(ModelSpec, ErrorsCarryLineNumbers) {
  try {
    parse_model_spec("seed 1\nlayer 6 16 relu\nlayer 15 8 none\n");
    FAIL() << "expected a chaining error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_model_spec("layer 6 16 relu\n"), Error);
  EXPECT_THROW(parse_model_spec("seed 1\n"), Error);
  EXPECT_THROW(parse_model_spec("seed 1\nlayer 6 16 tanh\n"), Error);
  EXPECT_THROW(parse_model_spec("seed 1\nlayer 6 0 relu\n"), Error);
  EXPECT_THROW(parse_model_spec("seed 1\nweights 3\n"), Error);
  EXPECT_THROW(parse_model_spec("seed 1\nlayer 6 16 relu extra\n"), Error);
}

TEST(Normalize, RowsAreRelativeToCentral) {
  const auto c = test::cloud_from({{1, 2, 3}, {2, 2, 3}, {0, 5, -1}}, 2);
  PointSubset s{0, {0, 1, 2, 0}};
  const auto fm = normalize_subset(c, s);
  ASSERT_EQ(fm.rows, 4u);
  ASSERT_EQ(fm.cols, 5u);
  EXPECT_EQ(fm(0, 0), 0.0);
  EXPECT_EQ(fm(0, 1), 0.0);
  EXPECT_EQ(fm(0, 2), 0.0);
  EXPECT_EQ(fm(1, 0), 1.0);
  EXPECT_EQ(fm(1, 1), 0.0);
  EXPECT_EQ(fm(1, 2), 0.0);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    const PointId id = s.member_ids[r];
    for (int a = 0; a < 3; ++a) EXPECT_EQ(fm(r, a), double(c[id].pos[a]) - double(c[0].pos[a]));
    for (std::size_t f = 0; f < 2; ++f) EXPECT_EQ(fm(r, 3 + f), double(c[id].feat[f]));
    const auto row = normalized_row(c, id, 0);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), fm.row(r).begin()));
  }
}

TEST(Forward, IdentityAndZero) {
  const MlpModel id_model({identity(6)});
  const auto in = random_matrix(5, 6, 1);
  EXPECT_EQ(mlp_forward(id_model, in).values, in.values);
  const auto m = model_of({{6, 8, Activation::kRelu}, {8, 3, Activation::kNone}}, 2);
  std::vector<DenseLayer> zero_bias(m.layers().begin(), m.layers().end());
  for (auto& l : zero_bias) std::fill(l.bias.begin(), l.bias.end(), 0.0f);
  const auto out = mlp_forward(MlpModel(zero_bias), FeatureMatrix(4, 6));
  for (double v : out.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mlp_forward(m, FeatureMatrix(2, 5)), Error);
}

TEST(Forward, MatchesNaiveOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = model_of({{6, 64, Activation::kRelu}, {64, 64, Activation::kRelu}, {64, 128, Activation::kRelu}}, seed);
    const auto in = random_matrix(32, 6, seed + 10);
    for (bool final_act : {true, false}) {
      const auto out = mlp_forward(m, in, final_act);
      ASSERT_EQ(out.rows, 32u);
      ASSERT_EQ(out.cols, 128u);
      for (std::size_t r = 0; r < 32; ++r) {
        const auto row = in.row(r);
        const auto expect = test::naive_forward(m, std::vector<double>(row.begin(), row.end()), final_act);
        const std::vector<double> got(out.row(r).begin(), out.row(r).end());
        EXPECT_LE(test::max_rel_diff(expect, got), 1e-6);
      }
    }
  }
}

TEST(Delta, ZeroIsIdentity) {
  const auto m = model_of({{6, 16, Activation::kRelu}, {16, 8, Activation::kNone}}, 3);
  const std::vector<double> cached{1, 2, 3, 4, 5, 6, 7, 8};
  const double zero[3] = {0, 0, 0};
  EXPECT_EQ(delta_compensate(cached, m, zero), cached);
  EXPECT_THROW(delta_compensate(std::vector<double>{1.0}, m, zero), Error);
}

TEST(Delta, LinearModelExact) {
  Rng r(77);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t layers = 1 + seed % 3;
    std::vector<LayerSpec> spec{{5, 12, Activation::kNone}};
    if (layers > 1) spec.push_back({12, 9, Activation::kNone});
    if (layers > 2) spec.push_back({9, 7, Activation::kNone});
    const auto m = model_of(spec, seed);
    // Point P with features, seen from central A (cached) and from G (target).
    std::vector<double> p(5), a(3), g(3);
    for (auto& v : p) v = r.uniform(-1, 1);
    for (auto& v : a) v = r.uniform(-1, 1);
    for (auto& v : g) v = r.uniform(-1, 1);
    auto rel = [&](const std::vector<double>& c) {
      std::vector<double> x = p;
      for (int i = 0; i < 3; ++i) x[i] = p[i] - c[i];
      return x;
    };
    const auto cached = test::naive_forward(m, rel(a));
    const double delta[3] = {a[0] - g[0], a[1] - g[1], a[2] - g[2]};
    const auto comp = delta_compensate(cached, m, delta);
    EXPECT_LE(test::max_rel_diff(test::naive_forward(m, rel(g)), comp), 1e-6);
  }
}

TEST(Delta, LinearizedIgnoresBiasAndActivation) {
  const auto m = model_of({{4, 5, Activation::kRelu}, {5, 2, Activation::kRelu}}, 9);
  const Point3 d{0.5f, -1.0f, 2.0f};
  const auto got = linearized_delta(m, d);
  // Reference: multiply [d, 0] through the raw weight matrices.
  std::vector<double> x{0.5, -1.0, 2.0, 0.0};
  for (const auto& l : m.layers()) {
    std::vector<double> y(l.out_dim, 0.0);
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      for (std::size_t i = 0; i < l.in_dim; ++i) y[o] += double(l.weight(i, o)) * x[i];
    }
    x = y;
  }
  EXPECT_LE(test::max_rel_diff(x, got), 1e-12);
}

TEST(Pool, Basics) {
  FeatureMatrix one(1, 3);
  one.values = {1, -2, 3};
  EXPECT_EQ(max_pool(one), (std::vector<double>{1, -2, 3}));
  FeatureMatrix two(2, 2);
  two.values = {1, 5, 3, 2};
  EXPECT_EQ(max_pool(two), (std::vector<double>{3, 5}));
  EXPECT_THROW(max_pool(FeatureMatrix()), Error);
  const auto big = random_matrix(32, 128, 4);
  const auto pooled = max_pool(big);
  for (std::size_t c = 0; c < 128; ++c) {
    double m = -INFINITY;
    for (std::size_t r = 0; r < 32; ++r) m = std::max(m, big(r, c));
    EXPECT_EQ(pooled[c], m);
  }
}

TEST(ReuseError, Report) {
  std::vector<SubsetResult> base{{1, {1.0, 2.0}, 0}, {2, {4.0, -8.0}, 0}};
  std::vector<SubsetResult> opt{{2, {4.0, -8.4}, 1}, {1, {1.0, 2.0}, 2}};
  const auto r = reuse_error_report(base, opt);
  ASSERT_EQ(r.per_subset_max_rel_error.size(), 2u);
  EXPECT_DOUBLE_EQ(r.per_subset_max_rel_error[0], 0.0);
  EXPECT_NEAR(r.per_subset_max_rel_error[1], 0.05, 1e-12);
  EXPECT_NEAR(r.max_rel_error, 0.05, 1e-12);
  EXPECT_NEAR(r.mean_rel_error, 0.025, 1e-12);
  EXPECT_DOUBLE_EQ(r.reused_argmax_fraction, 3.0 / 4.0);
  opt.pop_back();
  EXPECT_THROW(reuse_error_report(base, opt), Error);
}
