#pragma once

// Root-cause ranking by a personalized-PageRank walk from the target feature
// over the causal graph, with transition weights proportional to each
// neighbour's |Pearson| similarity to the target series.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"

namespace netrca {

struct PearsonResult {
  double score = 0.0;
  bool warning = false;  // fewer than two shared timestamps
};

// |Pearson correlation| of two series aligned on shared timestamps. A
// constant series scores 0.
inline PearsonResult pearson_score(std::span<const double> fi, std::span<const Timestamp> ti, std::span<const double> f0,
                                   std::span<const Timestamp> t0) {
  if (fi.size() != ti.size() || f0.size() != t0.size()) throw InvalidArgument("pearson_score: series/timestamp length mismatch");
  std::vector<double> x;
  std::vector<double> y;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < ti.size() && b < t0.size()) {
    if (ti[a] < t0[b]) {
      ++a;
    } else if (t0[b] < ti[a]) {
      ++b;
    } else {
      x.push_back(fi[a++]);
      y.push_back(f0[b++]);
    }
  }
  if (x.size() < 2) return {0.0, true};
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, false};
  const double r = std::abs(sxy) / (std::sqrt(sxx) * std::sqrt(syy));
  return {std::min(r, 1.0), false};
}

// Same-clock convenience overload.
inline double pearson_score(std::span<const double> fi, std::span<const double> f0) {
  if (fi.size() != f0.size()) throw InvalidArgument("pearson_score: length mismatch");
  std::vector<Timestamp> t(fi.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<Timestamp>(k);
  return pearson_score(fi, t, f0, t).score;
}

using SimilarityScores = std::map<FeatureId, double>;

// Similarity of every graph feature node present in the sample to the target.
inline SimilarityScores similarity_scores(const Sample& sample, const CausalGraph& graph, FeatureId target) {
  SimilarityScores s;
  const auto f0 = sample.series(target);
  for (FeatureId f : graph.feature_ids()) {
    if (f == target) {
      s[f] = 1.0;
      continue;
    }
    if (!sample.column_of(f)) continue;
    s[f] = pearson_score(sample.series(f), sample.timestamps, f0, sample.timestamps).score;
  }
  return s;
}

// Row-stochastic transition matrix over graph nodes. Adjacency is the
// undirected closure of the causal edges restricted to feature nodes.
struct WalkWeights {
  std::vector<std::vector<double>> w;  // w[i][j]
  std::vector<std::uint8_t> defined;   // row i has at least one neighbour
};

inline WalkWeights edge_weights(const CausalGraph& graph, const SimilarityScores& scores) {
  const std::size_t n = graph.size();
  WalkWeights out;
  out.w.assign(n, std::vector<double>(n, 0.0));
  out.defined.assign(n, 0);
  std::vector<std::vector<std::uint8_t>> adj(n, std::vector<std::uint8_t>(n, 0));
  for (auto [p, c] : graph.edges) {
    if (graph.is_feature_node(p) && graph.is_feature_node(c)) {
      adj[p][c] = 1;
      adj[c][p] = 1;
    }
  }
  auto score_of = [&](std::size_t j) {
    auto f = CausalGraph::parse_feature_node(graph.nodes[j]);
    auto it = scores.find(*f);
    if (it == scores.end()) throw InvalidArgument("edge_weights: no similarity score for feature " + graph.nodes[j]);
    return it->second;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    std::size_t degree = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!adj[i][j]) continue;
      ++degree;
      mass += score_of(j);
    }
    if (degree == 0) continue;
    out.defined[i] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!adj[i][j]) continue;
      out.w[i][j] = mass > 0.0 ? score_of(j) / mass : 1.0 / static_cast<double>(degree);
    }
  }
  return out;
}

struct WalkConfig {
  double damping = 0.85;
  double tolerance = 1e-10;
  int max_iterations = 1000;

  void validate() const {
    if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("damping must be in (0, 1)");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  }
};

struct WalkResult {
  std::vector<double> pi;  // indexed like graph.nodes
  int iterations = 0;
  bool converged = false;
};

// Power iteration pi <- d W'pi + (1-d) e_target; mass leaving rows without
// neighbours returns to the target.
inline WalkResult personalized_pagerank(const CausalGraph& graph, const WalkWeights& weights, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t n = graph.size();
  if (weights.w.size() != n) throw InvalidArgument("personalized_pagerank: weight matrix does not match graph");
  WalkResult out;
  std::vector<double> pi(n, 0.0);
  pi[graph.target] = 1.0;
  std::vector<double> next(n);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!weights.defined[i]) {
        dangling += pi[i];
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) next[j] += cfg.damping * weights.w[i][j] * pi[i];
    }
    next[graph.target] += cfg.damping * dangling + (1.0 - cfg.damping);
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change += std::abs(next[j] - pi[j]);
    }
    pi.swap(next);
    out.iterations = it;
    if (change < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.pi = std::move(pi);
  return out;
}

struct CauseScore {
  CauseId cause = 0;
  double score = 0.0;
  friend bool operator==(const CauseScore&, const CauseScore&) = default;
};

// Cause score = total visit mass on its adjacent features; descending, ties
// by ascending cause id.
inline std::vector<CauseScore> rank_causes(const CausalGraph& graph, std::span<const double> pi,
                                           const std::map<CauseId, std::vector<FeatureId>>& adjacent) {
  std::vector<CauseScore> out;
  for (const auto& [cause, features] : adjacent) {
    double s = 0.0;
    for (FeatureId f : features) {
      if (auto idx = graph.index_of_feature(f)) s += pi[*idx];
    }
    out.push_back({cause, s});
  }
  std::stable_sort(out.begin(), out.end(), [](const CauseScore& a, const CauseScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.cause < b.cause;
  });
  return out;
}

}  // namespace netrca
