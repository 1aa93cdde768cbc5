#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "netrca/netrca.hpp"

namespace netrca::testing {

// Sample whose columns are `cols` (one vector per feature), timestamps 0, 60, ...
inline Sample make_sample(std::string id, const std::vector<FeatureId>& features, const std::vector<std::vector<double>>& cols,
                          std::optional<CauseSet> label = std::nullopt, Timestamp start = 0, Timestamp step = 60) {
  Sample s;
  s.id = std::move(id);
  s.feature_ids = features;
  const std::size_t m = cols.empty() ? 0 : cols.front().size();
  for (std::size_t r = 0; r < m; ++r) s.timestamps.push_back(start + static_cast<Timestamp>(r) * step);
  s.values = Matrix(m, features.size());
  for (std::size_t c = 0; c < cols.size(); ++c) s.values.set_column(c, cols[c]);
  s.missing.assign(m * features.size(), 0);
  s.label = std::move(label);
  return s;
}

inline Matrix random_matrix(Rng& rng, std::size_t m, std::size_t n) {
  Matrix x(m, n);
  for (double& v : x.data) v = rng.normal();
  return x;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("netrca_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Two-feature set labelled by the sign of a random linear function, with a
// margin so classes are strictly separable.
inline std::pair<FeatureTable, std::vector<double>> separable_set(std::uint64_t seed, std::size_t rows = 200) {
  Rng rng(seed);
  const double a = rng.normal();
  const double b = rng.normal();
  Matrix x(rows, 2);
  std::vector<double> y;
  for (std::size_t r = 0; r < rows; ++r) {
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = rng.uniform(-1.0, 1.0);
      v = rng.uniform(-1.0, 1.0);
      s = a * u + b * v;
    } while (std::abs(s) < 0.05);
    x(r, 0) = u;
    x(r, 1) = v;
    y.push_back(s > 0 ? 1.0 : 0.0);
  }
  return {FeatureTable::from_columns({"u", "v"}, x), y};
}

// Noisy binary set over `p` features for loss-trajectory checks.
inline std::pair<FeatureTable, std::vector<double>> noisy_set(std::uint64_t seed, std::size_t rows = 120, std::size_t p = 4) {
  Rng rng(seed);
  Matrix x(rows, p);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < p; ++c) names.push_back("x" + std::to_string(c));
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      x(r, c) = rng.normal();
      s += (c % 2 ? -0.7 : 1.0) * x(r, c);
    }
    y[r] = rng.bernoulli(1.0 / (1.0 + std::exp(-2.0 * s))) ? 1.0 : 0.0;
  }
  y[0] = 1.0;
  y[1] = 0.0;
  return {FeatureTable::from_columns(names, x), y};
}

// Planted-rule table: y = 1 iff f13_min <= 1.75e5, plus two distractors.
inline std::pair<FeatureTable, std::vector<std::uint8_t>> planted_rule_set(std::uint64_t seed, std::size_t rows = 300) {
  Rng rng(seed);
  Matrix x(rows, 3);
  std::vector<std::uint8_t> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    x(r, 0) = rng.normal(50.0, 10.0);
    x(r, 1) = rng.uniform(1.0e5, 2.5e5);
    x(r, 2) = rng.normal(0.0, 1.0);
    y[r] = x(r, 1) <= 1.75e5 ? 1 : 0;
  }
  return {FeatureTable::from_columns({"f0_mean", "f13_min", "f15_max"}, x), y};
}

// Squared-loss model built from depth-1 stumps, so f is additive across
// features. Each feature gets one to three stumps.
inline AttributionContext additive_context(Rng& rng, std::size_t p) {
  AttributionContext ctx;
  ctx.f.loss = Loss::kSquared;
  ctx.f.learning_rate = 1.0;
  ctx.f.base_score = rng.normal();
  for (std::size_t j = 0; j < p; ++j) {
    ctx.features.push_back(static_cast<FeatureId>(j + 1));
    ctx.f.feature_names.push_back("f" + std::to_string(j + 1));
    ctx.baseline.push_back(rng.normal());
    const auto stumps = 1 + rng.below(3);
    for (std::size_t k = 0; k < stumps; ++k) {
      RegressionTree t;
      t.nodes.resize(3);
      t.nodes[0].feature = static_cast<int>(j);
      t.nodes[0].threshold = rng.normal();
      t.nodes[0].left = 1;
      t.nodes[0].right = 2;
      t.nodes[1].value = rng.normal();
      t.nodes[2].value = rng.normal();
      ctx.f.trees.push_back(t);
    }
  }
  return ctx;
}

// Component of an additive context's output contributed by feature j.
inline double additive_term(const AttributionContext& ctx, std::size_t j, double v) {
  double s = 0.0;
  for (const auto& t : ctx.f.trees) {
    if (t.nodes[0].feature != static_cast<int>(j)) continue;
    s += v <= t.nodes[0].threshold ? t.nodes[1].value : t.nodes[2].value;
  }
  return s;
}

// Random causal graph over feature nodes "0".."n-1" plus a non-feature
// node, target 0, each ordered pair an edge with probability `density`.
inline CausalGraph random_graph(Rng& rng, std::size_t n, double density = 0.3) {
  CausalGraph g;
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(std::to_string(i));
  g.nodes.push_back("R1");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(density)) g.edges.emplace_back(i, j);
  if (n > 1) g.edges.emplace_back(n, 1 + rng.below(n - 1));
  return g;
}

inline SimilarityScores random_scores(Rng& rng, const CausalGraph& g) {
  SimilarityScores s;
  for (FeatureId f : g.feature_ids()) s[f] = rng.bernoulli(0.15) ? 0.0 : rng.uniform();
  s[0] = 1.0;
  return s;
}

}  // namespace netrca::testing
