#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace netrca;
using netrca::testing::noisy_set;
using netrca::testing::separable_set;

namespace {

GbdtModel stump_model() {
  GbdtModel m;
  m.loss = Loss::kLogistic;
  m.feature_names = {"x"};
  RegressionTree t;
  t.nodes.resize(3);
  t.nodes[0].feature = 0;
  t.nodes[0].threshold = 1.0;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[1].value = -1.0;
  t.nodes[2].value = 1.0;
  m.trees.push_back(t);
  return m;
}

FeatureVector fv(std::map<std::string, double> e) {
  FeatureVector v;
  v.entries = std::move(e);
  return v;
}

double accuracy(const GbdtModel& m, const FeatureTable& t, const std::vector<double>& y) {
  std::size_t ok = 0;
  for (std::size_t r = 0; r < t.num_rows(); ++r) ok += (m.predict_row(t.row(r)) >= 0.5) == (y[r] == 1.0);
  return static_cast<double>(ok) / static_cast<double>(t.num_rows());
}

}  // namespace

TEST(GbdtTrain, OneFeatureSplitAtZero) {
  Matrix x(10, 1);
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i - 4.5;
    y.push_back(i >= 5 ? 1.0 : 0.0);
  }
  GbdtParams p;
  p.n_trees = 50;
  p.max_depth = 1;
  const auto t = FeatureTable::from_columns({"x"}, x);
  const auto m = train(t, y, p);
  EXPECT_EQ(accuracy(m, t, y), 1.0);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, 0.0);
}

TEST(GbdtTrain, SquaredLossConstantTarget) {
  Rng rng(3);
  const Matrix x = netrca::testing::random_matrix(rng, 30, 3);
  const std::vector<double> y(30, 4.25);
  GbdtParams p;
  p.loss = Loss::kSquared;
  const auto t = FeatureTable::from_columns({"a", "b", "c"}, x);
  const auto m = train(t, y, p);
  for (std::size_t r = 0; r < 30; ++r) EXPECT_NEAR(m.predict_row(t.row(r)), 4.25, 1e-6);
}

TEST(GbdtTrain, SeparableSetReachesFullAccuracyWithFallingLoss) {
  const auto [t, y] = separable_set(5);
  TrainTrace trace;
  const auto m = train(t, y, GbdtParams{}, &trace);
  EXPECT_EQ(accuracy(m, t, y), 1.0);
  for (std::size_t i = 1; i < trace.loss_per_round.size(); ++i) EXPECT_LT(trace.loss_per_round[i], trace.loss_per_round[i - 1]);
}

TEST(GbdtTrain, WeightedLossNonIncreasingOnNoisyData) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto [t, y] = noisy_set(seed);
    GbdtParams p;
    p.n_trees = 60;
    p.positive_class_weight = 0.5 + static_cast<double>(seed % 3);
    TrainTrace trace;
    train(t, y, p, &trace);
    ASSERT_EQ(trace.loss_per_round.size(), 61u);
    for (std::size_t i = 1; i < trace.loss_per_round.size(); ++i) {
      EXPECT_LE(trace.loss_per_round[i], trace.loss_per_round[i - 1] + 1e-12) << "seed " << seed << " round " << i;
    }
  }
}

TEST(GbdtTrain, TraceMatchesIndependentLossRecomputation) {
  const auto [t, y] = noisy_set(77);
  GbdtParams p;
  p.n_trees = 10;
  p.positive_class_weight = 2.0;
  TrainTrace trace;
  const auto m = train(t, y, p, &trace);
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    const double prob = m.predict_row(t.row(r));
    const double w = y[r] == 1.0 ? 2.0 : 1.0;
    total += -w * (y[r] * std::log(prob) + (1 - y[r]) * std::log(1 - prob));
    wsum += w;
  }
  EXPECT_NEAR(trace.loss_per_round.back(), total / wsum, 1e-12);
}

TEST(GbdtTrain, RejectsBadInput) {
  Matrix x(3, 1);
  const auto t = FeatureTable::from_columns({"x"}, x);
  EXPECT_THROW(train(t, std::vector<double>{1, 1, 1}, GbdtParams{}), InvalidArgument);
  Matrix bad(2, 1);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(train(FeatureTable::from_columns({"x"}, bad), std::vector<double>{0, 1}, GbdtParams{}), InvalidArgument);
  GbdtParams p;
  p.learning_rate = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GbdtParams{};
  p.max_depth = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(GbdtTrain, DeterministicSerialization) {
  const auto [t, y] = noisy_set(9);
  GbdtParams p;
  p.n_trees = 20;
  p.feature_subsample = 0.5;
  p.seed = 42;
  EXPECT_EQ(serialize(train(t, y, p)), serialize(train(t, y, p)));
}

TEST(GbdtTrain, PositiveWeightNeverLowersTrainingRecall) {
  const auto [t, y] = noisy_set(13, 200);
  double previous = -1.0;
  for (double w : {0.5, 1.0, 4.0}) {
    GbdtParams p;
    p.n_trees = 30;
    p.max_depth = 2;
    p.positive_class_weight = w;
    const auto m = train(t, y, p);
    std::size_t tp = 0;
    std::size_t pos = 0;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      if (y[r] != 1.0) continue;
      ++pos;
      tp += m.predict_row(t.row(r)) >= 0.5;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    EXPECT_GE(recall, previous);
    previous = recall;
  }
}

TEST(GbdtTrain, UnusedFeatureRecodingDoesNotChangePredictions) {
  auto [t, y] = separable_set(21, 80);
  Matrix x(80, 3);
  for (std::size_t r = 0; r < 80; ++r) {
    x(r, 0) = t.x(r, 0);
    x(r, 1) = t.x(r, 1);
    x(r, 2) = 1.0;  // constant, never split on
  }
  auto t3 = FeatureTable::from_columns({"u", "v", "z"}, x);
  const auto m = train(t3, y, GbdtParams{});
  for (std::size_t r = 0; r < 80; ++r) {
    auto row = std::vector<double>(t3.row(r).begin(), t3.row(r).end());
    const double before = m.predict_row(row);
    row[2] = std::exp(row[2]) * 3.0 + 7.0;
    EXPECT_EQ(m.predict_row(row), before);
  }
}

TEST(GbdtPredict, ZeroTreesIsHalf) {
  GbdtModel m;
  m.feature_names = {"x"};
  EXPECT_EQ(predict(m, fv({{"x", 3.0}})), 0.5);
}

TEST(GbdtPredict, HandStump) {
  EXPECT_NEAR(predict(stump_model(), fv({{"x", 2.0}})), 0.73106, 1e-5);
  EXPECT_NEAR(predict(stump_model(), fv({{"x", 1.0}})), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
}

TEST(GbdtPredict, MissingKeyThrows) { EXPECT_THROW(predict(stump_model(), fv({{"y", 2.0}})), InvalidArgument); }

TEST(GbdtPredict, SquaredConstantModel) {
  GbdtModel m;
  m.loss = Loss::kSquared;
  m.base_score = 2.0;
  m.feature_names = {"x"};
  RegressionTree leaf;
  leaf.nodes.resize(1);
  leaf.nodes[0].value = 0.5;
  m.trees = {leaf, leaf};
  EXPECT_EQ(predict(m, fv({{"x", -100.0}})), 3.0);
  EXPECT_EQ(predict(m, fv({{"x", 100.0}})), 3.0);
}

TEST(GbdtClassify, ThresholdConvention) {
  GbdtModel m;
  m.feature_names = {"x"};
  EXPECT_TRUE(classify(m, fv({{"x", 0.0}}), 0.5));
  m.base_score = std::log(0.49 / 0.51);
  EXPECT_FALSE(classify(m, fv({{"x", 0.0}}), 0.5));
  m.base_score = -50.0;
  EXPECT_TRUE(classify(m, fv({{"x", 0.0}}), 0.0));
}

TEST(GbdtSerialize, RoundTripIsBitExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [t, y] = noisy_set(seed);
    GbdtParams p;
    p.n_trees = 25;
    const auto m = train(t, y, p);
    const auto text = serialize(m);
    const auto back = deserialize_gbdt(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(GbdtSerialize, RejectsWrongVersionAndUnknownFeature) {
  auto j = to_json(stump_model());
  j["version"] = 99;
  EXPECT_THROW(gbdt_from_json(j), DataError);
  EXPECT_THROW(deserialize_gbdt("{not json"), DataError);
}
