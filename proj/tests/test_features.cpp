#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace netrca;
using netrca::testing::make_sample;

namespace {

// Sample-standard-deviation form of the adjusted skewness:
// n / ((n-1)(n-2)) * sum(((x - mean) / s)^3).
double skew_oracle(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / (n - 1.0));
  double acc = 0.0;
  for (double v : x) acc += std::pow((v - mean) / s, 3);
  return n / ((n - 1.0) * (n - 2.0)) * acc;
}

// Position-based type-7 quantile written independently of the library.
double quantile_oracle(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = 1.0 + (static_cast<double>(x.size()) - 1.0) * p;  // 1-based
  const auto k = static_cast<std::size_t>(pos);
  if (k >= x.size()) return x.back();
  return x[k - 1] + (pos - static_cast<double>(k)) * (x[k] - x[k - 1]);
}

}  // namespace

TEST(TemporalStats, ConstantSeries) {
  const std::vector<double> x = {5, 5, 5, 5};
  const auto s = temporal_stats(x);
  for (const auto& name : temporal_stat_names()) {
    if (name == "skew" || name == "num_peaks" || name == "mean_change") {
      EXPECT_EQ(s.at(name), 0.0) << name;
    } else {
      EXPECT_EQ(s.at(name), 5.0) << name;
    }
  }
}

TEST(TemporalStats, PeaksAndMeanChange) {
  const std::vector<double> x = {1, 3, 2, 4};
  const auto s = temporal_stats(x);
  EXPECT_EQ(s.at("num_peaks"), 1.0);
  EXPECT_DOUBLE_EQ(s.at("mean_change"), 1.0);
}

TEST(TemporalStats, MedianOfOneToTen) {
  std::vector<double> x;
  for (int i = 1; i <= 10; ++i) x.push_back(i);
  EXPECT_DOUBLE_EQ(temporal_stats(x).at("q50"), 5.5);
  EXPECT_DOUBLE_EQ(temporal_stats(x).at("median"), 5.5);
}

TEST(TemporalStats, SingletonAndEmpty) {
  const std::vector<double> one = {2.5};
  const auto s = temporal_stats(one);
  EXPECT_EQ(s.at("q90"), 2.5);
  EXPECT_EQ(s.at("mean_change"), 0.0);
  EXPECT_THROW(temporal_stats(std::vector<double>{}), InvalidArgument);
}

TEST(TemporalStats, KeySetIsFixed) {
  const std::vector<double> x = {1, 2};
  EXPECT_EQ(temporal_stats(x).size(), temporal_stat_names().size());
}

TEST(TemporalStats, MatchesOraclesOnRandomSeries) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 3 + rng.below(60);
    std::vector<double> x(m);
    for (double& v : x) v = rng.normal(10.0, 3.0);
    const auto s = temporal_stats(x);
    EXPECT_NEAR(s.at("skew"), skew_oracle(x), 1e-9);
    for (int d = 1; d <= 9; ++d) {
      EXPECT_NEAR(s.at("q" + std::to_string(d * 10)), quantile_oracle(x, d / 10.0), 1e-12);
    }
  }
}

TEST(TemporalStats, ScaleAndTranslationProperties) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 3 + rng.below(40);
    std::vector<double> x(m);
    for (double& v : x) v = rng.normal();
    const double c = rng.uniform(0.1, 10.0);
    const double shift = rng.uniform(-50.0, 50.0);
    std::vector<double> scaled(m);
    std::vector<double> shifted(m);
    for (std::size_t i = 0; i < m; ++i) {
      scaled[i] = c * x[i];
      shifted[i] = x[i] + shift;
    }
    const auto a = temporal_stats(x);
    const auto b = temporal_stats(scaled);
    const auto t = temporal_stats(shifted);
    for (int d = 1; d <= 9; ++d) {
      const auto key = "q" + std::to_string(d * 10);
      EXPECT_NEAR(b.at(key), c * a.at(key), 1e-9 * (1.0 + std::abs(c * a.at(key))));
    }
    EXPECT_NEAR(t.at("skew"), a.at("skew"), 1e-6);
    EXPECT_EQ(t.at("num_peaks"), a.at("num_peaks"));
  }
}

TEST(DirectionFeatures, TwoAdjacentDiagonalCells) {
  const std::vector<int> idx = {0, 9};
  const auto s = direction_features(idx, GridShape{});
  EXPECT_NEAR(s.at("mean"), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.at("min"), 1.41421, 1e-5);
  EXPECT_EQ(s.at("var"), 0.0);
}

TEST(DirectionFeatures, OppositeCorners) {
  const std::vector<int> idx = {0, 31};
  EXPECT_NEAR(direction_features(idx, GridShape{}).at("max"), std::sqrt(58.0), 1e-12);
}

TEST(DirectionFeatures, SingleDistinctIndexIsZero) {
  const std::vector<int> idx = {5, 5, 5};
  for (const auto& [k, v] : direction_features(idx, GridShape{})) EXPECT_EQ(v, 0.0) << k;
}

TEST(DirectionFeatures, OutOfRangeThrows) {
  const std::vector<int> idx = {0, 32};
  EXPECT_THROW(direction_features(idx, GridShape{}), InvalidArgument);
}

TEST(DirectionFeatures, ColumnMajorMapping) {
  GridShape g;
  g.row_major = false;
  EXPECT_EQ(grid_coordinates(5, g), (std::pair<int, int>{1, 1}));
  EXPECT_EQ(grid_coordinates(5, GridShape{}), (std::pair<int, int>{0, 5}));
}

TEST(DirectionFeatures, PermutationAndRepetitionInvariant) {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> idx(2 + rng.below(20));
    for (int& i : idx) i = static_cast<int>(rng.below(32));
    auto perm = idx;
    rng.shuffle(perm);
    perm.push_back(idx.front());
    EXPECT_EQ(direction_features(idx, GridShape{}), direction_features(perm, GridShape{}));
  }
}

TEST(DirectionFeatures, PairwiseOracle) {
  const std::vector<int> idx = {0, 1, 8};  // (0,0) (0,1) (1,0): distances 1, 1, sqrt2
  const auto s = direction_features(idx, GridShape{});
  const double mean = (2.0 + std::sqrt(2.0)) / 3.0;
  const double var = (2 * (1 - mean) * (1 - mean) + (std::sqrt(2.0) - mean) * (std::sqrt(2.0) - mean)) / 3.0;
  EXPECT_NEAR(s.at("mean"), mean, 1e-12);
  EXPECT_NEAR(s.at("var"), var, 1e-12);
  EXPECT_NEAR(s.at("q50"), 1.0, 1e-12);
  EXPECT_NEAR(s.at("q75"), (1.0 + std::sqrt(2.0)) / 2.0, 1e-12);
}

TEST(Interaction, ConstantRatio) {
  const std::vector<double> x = {2, 4};
  const std::vector<double> y = {1, 2};
  EXPECT_EQ(ratio_stats(x, y).at("mean"), 2.0);
}

TEST(Interaction, AllZeroDenominatorIsDegenerate) {
  const std::vector<double> x = {1};
  const std::vector<double> y = {0};
  const auto s = ratio_stats(x, y);
  EXPECT_EQ(s.at("degenerate"), 1.0);
  EXPECT_EQ(s.at("mean"), 0.0);
}

TEST(Interaction, ZeroDenominatorSkipped) {
  const std::vector<double> x = {6, 0, 9};
  const std::vector<double> y = {3, 0, 3};
  const auto s = ratio_stats(x, y);
  EXPECT_DOUBLE_EQ(s.at("mean"), 2.5);
  EXPECT_EQ(s.at("degenerate"), 0.0);
}

TEST(Interaction, KeysPerPair) {
  const auto s = make_sample("a", {1, 2, 3}, {{2, 4}, {1, 2}, {4, 4}});
  const std::vector<std::pair<FeatureId, FeatureId>> pairs = {{1, 2}, {3, 2}};
  const auto f = interaction_features(s, pairs);
  EXPECT_EQ(f.at("ratio_p0_mean"), 2.0);
  EXPECT_EQ(f.at("ratio_p1_max"), 4.0);
}

namespace {

FeatureSchema small_schema() {
  FeatureSchema s;
  s.target_feature = 0;
  s.causes = {1, 2, 3};
  s.adjacent = {{1, {13}}, {2, {20}}, {3, {13}}};
  s.location_feature = 20;
  s.xy_pairs = {{13, 15}};
  s.cause_features = {{1, CauseFeatureSet{{0, 13, 15}, false, false}},
                      {2, CauseFeatureSet{{0, 20}, false, true}},
                      {3, CauseFeatureSet{{}, false, false}}};
  return s;
}

Sample small_sample() {
  return make_sample("s", {0, 13, 15, 20}, {{1, 2, 3}, {4, 5, 6}, {2, 2, 2}, {0, 9, 9}});
}

}  // namespace

TEST(Featurize, CauseOneUsesOnlyItsRawFeatures) {
  const auto fv = featurize(small_sample(), small_schema(), 1);
  for (const auto& [k, v] : fv.entries) {
    EXPECT_TRUE(k.rfind("f0_", 0) == 0 || k.rfind("f13_", 0) == 0 || k.rfind("f15_", 0) == 0) << k;
  }
  EXPECT_EQ(fv.entries.size(), 3 * temporal_stat_names().size());
}

TEST(Featurize, LocationAddsDirectionAndAttribution) {
  const AttributionMap attr = {{13, 0.5}, {15, 0.25}};
  const auto fv = featurize(small_sample(), small_schema(), 2, &attr);
  EXPECT_NEAR(fv.at("dist_mean"), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(fv.at("attr_f13"), 0.5);
  EXPECT_TRUE(fv.entries.count("f20_mean"));
  EXPECT_FALSE(fv.entries.count("f13_mean"));
}

TEST(Featurize, EmptyFeatureSetThrows) {
  try {
    featurize(small_sample(), small_schema(), 3);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("empty feature set"), std::string::npos);
  }
}

TEST(Featurize, MissingFeatureThrows) {
  auto schema = small_schema();
  schema.cause_features[1].raw.push_back(99);
  EXPECT_THROW(featurize(small_sample(), schema, 1), DataError);
}

TEST(Featurize, RequiresInterpolatedSample) {
  auto s = small_sample();
  s.missing[0] = 1;
  EXPECT_THROW(featurize(s, small_schema(), 1), InvalidArgument);
}

TEST(Featurize, IdenticalSamplesGiveIdenticalVectors) {
  EXPECT_EQ(featurize(small_sample(), small_schema(), 2), featurize(small_sample(), small_schema(), 2));
}

TEST(Featurize, ReferenceSchemaKeySetStableAcrossSamples) {
  auto cfg = reference_config();
  cfg.n_samples = 20;
  const auto syn = generate(cfg, reference_graph(), reference_schema());
  for (CauseId c : {1, 2, 3}) {
    std::set<std::string> keys;
    for (std::size_t i = 0; i < syn.dataset.samples.size(); ++i) {
      const auto fv = featurize(interpolated(syn.dataset.samples[i]), syn.dataset.schema, c);
      std::set<std::string> k;
      for (const auto& [name, v] : fv.entries) k.insert(name);
      if (i == 0) keys = k;
      EXPECT_EQ(k, keys);
    }
  }
}
