#pragma once

// Second-order gradient-boosted regression trees with exact greedy split
// search. Logistic loss drives the per-cause classifiers, squared loss the
// attribution regressor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "netrca/core.hpp"
#include "netrca/features.hpp"
#include "netrca/random.hpp"
#include "netrca/table.hpp"

namespace netrca {

enum class Loss { kLogistic, kSquared };

inline std::string to_string(Loss l) { return l == Loss::kLogistic ? "logistic" : "squared"; }

inline Loss loss_from_string(const std::string& s) {
  if (s == "logistic") return Loss::kLogistic;
  if (s == "squared") return Loss::kSquared;
  throw InvalidArgument("unknown loss '" + s + "'");
}

struct GbdtParams {
  int n_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double l2_lambda = 1.0;
  double positive_class_weight = 1.0;
  Loss loss = Loss::kLogistic;
  std::uint64_t seed = 0;
  double feature_subsample = 1.0;

  void validate() const {
    if (n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
    if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidArgument("learning_rate must be in (0, 1]");
    if (!(min_child_weight >= 0.0)) throw InvalidArgument("min_child_weight must be >= 0");
    if (!(l2_lambda >= 0.0)) throw InvalidArgument("l2_lambda must be >= 0");
    if (!(positive_class_weight > 0.0)) throw InvalidArgument("positive_class_weight must be > 0");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0)) throw InvalidArgument("feature_subsample must be in (0, 1]");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// x[feature] <= threshold goes left; NaN follows default_left.
struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> row) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      const double v = row[n.feature];
      const bool left = std::isnan(v) ? n.default_left : v <= n.threshold;
      i = left ? n.left : n.right;
    }
    return nodes[i].value;
  }
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbdtModel {
  Loss loss = Loss::kLogistic;
  double base_score = 0.0;  // margin for logistic
  double learning_rate = 1.0;
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;

  double margin(std::span<const double> row) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.evaluate(row);
    return base_score + learning_rate * s;
  }

  double transform(double m) const { return loss == Loss::kLogistic ? 1.0 / (1.0 + std::exp(-m)) : m; }

  // Row ordered like feature_names.
  double predict_row(std::span<const double> row) const { return transform(margin(row)); }

  std::vector<double> align(const FeatureVector& x) const {
    std::vector<double> row(feature_names.size());
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
      auto it = x.entries.find(feature_names[i]);
      if (it == x.entries.end()) throw InvalidArgument("predict: feature vector " + x.sample_id + " lacks " + feature_names[i]);
      row[i] = it->second;
    }
    return row;
  }

  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

inline double predict(const GbdtModel& model, const FeatureVector& x) { return model.predict_row(model.align(x)); }

inline bool classify(const GbdtModel& model, const FeatureVector& x, double threshold = 0.5) {
  return predict(model, x) >= threshold;
}

// Weighted training loss (positives scaled by `positive_weight`).
inline double weighted_loss(Loss loss, std::span<const double> margins, std::span<const double> targets, double positive_weight) {
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double m = margins[i];
    const double y = targets[i];
    if (loss == Loss::kLogistic) {
      const double w = y > 0.5 ? positive_weight : 1.0;
      // log(1 + e^m) - y m, computed stably
      const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
      total += w * (softplus - y * m);
      wsum += w;
    } else {
      total += 0.5 * (m - y) * (m - y);
      wsum += 1.0;
    }
  }
  return total / wsum;
}

struct TrainTrace {
  std::vector<double> loss_per_round;  // entry 0 is the loss of the base score alone
};

namespace gbdt_detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

inline double score(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace gbdt_detail

inline GbdtModel train(const FeatureTable& table, std::span<const double> targets, const GbdtParams& params,
                       TrainTrace* trace = nullptr) {
  params.validate();
  const std::size_t n = table.num_rows();
  const std::size_t p = table.num_features();
  if (n < 2) throw InvalidArgument("train: need at least 2 rows");
  if (targets.size() != n) throw InvalidArgument("train: target count does not match rows");
  if (p == 0) throw InvalidArgument("train: no features");
  for (double v : table.x.data) {
    if (std::isnan(v)) throw InvalidArgument("train: NaN feature value");
  }
  for (double y : targets) {
    if (!std::isfinite(y)) throw InvalidArgument("train: non-finite target");
  }

  std::vector<double> w(n, 1.0);
  if (params.loss == Loss::kLogistic) {
    std::size_t pos = 0;
    for (double y : targets) {
      if (y != 0.0 && y != 1.0) throw InvalidArgument("train: logistic targets must be 0/1");
      pos += y == 1.0;
    }
    if (pos == 0 || pos == n) throw InvalidArgument("train: logistic loss needs both classes");
    for (std::size_t i = 0; i < n; ++i) w[i] = targets[i] == 1.0 ? params.positive_class_weight : 1.0;
  }

  GbdtModel model;
  model.loss = params.loss;
  model.learning_rate = params.learning_rate;
  model.feature_names = table.names;
  {
    double wy = 0.0;
    double ws = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wy += w[i] * targets[i];
      ws += w[i];
    }
    if (params.loss == Loss::kLogistic) {
      model.base_score = std::log(wy / (ws - wy));
    } else {
      model.base_score = wy / ws;
    }
  }

  // Features scanned in name order so equal-gain ties resolve to the
  // lexicographically first feature, then the lower threshold.
  std::vector<std::size_t> by_name(p);
  std::iota(by_name.begin(), by_name.end(), 0);
  std::stable_sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) { return table.names[a] < table.names[b]; });

  std::vector<std::vector<std::uint32_t>> sorted(p, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < p; ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), 0u);
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](std::uint32_t a, std::uint32_t b) { return table.x(a, f) < table.x(b, f); });
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> g(n);
  std::vector<double> h(n);
  if (trace) trace->loss_per_round.push_back(weighted_loss(params.loss, margin, targets, params.positive_class_weight));

  Rng rng(params.seed);
  const double lambda = params.l2_lambda;

  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (params.loss == Loss::kLogistic) {
        const double prob = 1.0 / (1.0 + std::exp(-margin[i]));
        g[i] = w[i] * (prob - targets[i]);
        h[i] = w[i] * std::max(prob * (1.0 - prob), 1e-16);
      } else {
        g[i] = margin[i] - targets[i];
        h[i] = 1.0;
      }
    }

    std::vector<std::size_t> features = by_name;
    if (params.feature_subsample < 1.0) {
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.feature_subsample * static_cast<double>(p))));
      std::vector<std::size_t> pick(p);
      std::iota(pick.begin(), pick.end(), 0);
      rng.shuffle(pick);
      pick.resize(k);
      std::vector<std::uint8_t> keep(p, 0);
      for (auto f : pick) keep[f] = 1;
      features.clear();
      for (auto f : by_name) {
        if (keep[f]) features.push_back(f);
      }
    }

    RegressionTree tree;
    tree.nodes.push_back({});
    std::vector<int> node_of(n, 0);  // current node per row, -1 once settled in a leaf
    std::vector<int> frontier = {0};
    std::vector<double> node_g(1, 0.0);
    std::vector<double> node_h(1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      node_g[0] += g[i];
      node_h[0] += h[i];
    }

    for (int depth = 0; depth <= params.max_depth && !frontier.empty(); ++depth) {
      std::vector<gbdt_detail::SplitCandidate> best(tree.nodes.size());
      if (depth < params.max_depth) {
        const std::size_t nn = tree.nodes.size();
        std::vector<double> gl(nn);
        std::vector<double> hl(nn);
        std::vector<double> last(nn);
        std::vector<std::uint8_t> seen(nn);
        for (std::size_t f : features) {
          std::fill(gl.begin(), gl.end(), 0.0);
          std::fill(hl.begin(), hl.end(), 0.0);
          std::fill(seen.begin(), seen.end(), 0);
          for (std::uint32_t row : sorted[f]) {
            const int node = node_of[row];
            if (node < 0) continue;
            const double v = table.x(row, f);
            if (seen[node] && v > last[node]) {
              const double hr = node_h[node] - hl[node];
              if (hl[node] >= params.min_child_weight && hr >= params.min_child_weight) {
                const double gr = node_g[node] - gl[node];
                const double gain = 0.5 * (gbdt_detail::score(gl[node], hl[node], lambda) + gbdt_detail::score(gr, hr, lambda) -
                                           gbdt_detail::score(node_g[node], node_h[node], lambda));
                if (gain > best[node].gain) best[node] = {gain, static_cast<int>(f), last[node] + (v - last[node]) / 2.0};
              }
            }
            gl[node] += g[row];
            hl[node] += h[row];
            last[node] = v;
            seen[node] = 1;
          }
        }
      }

      std::vector<int> next;
      std::vector<int> left_of(tree.nodes.size(), -1);
      for (int node : frontier) {
        const auto& b = best[node];
        if (b.feature < 0 || !(b.gain > 0.0)) {
          tree.nodes[node].value = -node_g[node] / (node_h[node] + lambda);
          continue;
        }
        const int l = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        node_g.resize(tree.nodes.size(), 0.0);
        node_h.resize(tree.nodes.size(), 0.0);
        tree.nodes[node].feature = b.feature;
        tree.nodes[node].threshold = b.threshold;
        tree.nodes[node].left = l;
        tree.nodes[node].right = l + 1;
        left_of.resize(tree.nodes.size(), -1);
        left_of[node] = l;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const int node = node_of[i];
        if (node < 0) continue;
        if (left_of[node] < 0) {
          node_of[i] = -1;
          continue;
        }
        const auto& split = tree.nodes[node];
        const int child = table.x(i, split.feature) <= split.threshold ? split.left : split.right;
        node_of[i] = child;
        node_g[child] += g[i];
        node_h[child] += h[i];
      }
      frontier = std::move(next);
    }
    for (int node : frontier) tree.nodes[node].value = -node_g[node] / (node_h[node] + lambda);

    for (std::size_t i = 0; i < n; ++i) margin[i] += params.learning_rate * tree.evaluate(table.row(i));
    model.trees.push_back(std::move(tree));
    if (trace) trace->loss_per_round.push_back(weighted_loss(params.loss, margin, targets, params.positive_class_weight));
  }
  return model;
}

// ---- serialization ----

inline constexpr int kGbdtFormatVersion = 1;

namespace gbdt_detail {

inline nlohmann::json node_to_json(const GbdtModel& m, const RegressionTree& t, int i) {
  const auto& n = t.nodes[i];
  if (n.is_leaf()) return {{"leaf", n.value}};
  return {{"split", m.feature_names[n.feature]},
          {"threshold", n.threshold},
          {"default_left", n.default_left},
          {"left", node_to_json(m, t, n.left)},
          {"right", node_to_json(m, t, n.right)}};
}

// Rebuilds nodes breadth-first, the order training emits them, so a parsed
// model compares equal to the original.
inline void tree_from_json(const nlohmann::json& root, const std::map<std::string, int>& index, RegressionTree& t) {
  std::vector<const nlohmann::json*> queue = {&root};
  t.nodes.push_back({});
  for (std::size_t id = 0; id < queue.size(); ++id) {
    const auto& j = *queue[id];
    auto& n = t.nodes[id];
    if (j.contains("leaf")) {
      n.value = j.at("leaf").get<double>();
      if (!std::isfinite(n.value)) throw DataError("gbdt model: non-finite leaf weight");
      continue;
    }
    const auto name = j.at("split").get<std::string>();
    auto it = index.find(name);
    if (it == index.end()) throw DataError("gbdt model: split on unknown feature " + name);
    n.feature = it->second;
    n.threshold = j.at("threshold").get<double>();
    n.default_left = j.value("default_left", true);
    n.left = static_cast<int>(queue.size());
    n.right = n.left + 1;
    queue.push_back(&j.at("left"));
    queue.push_back(&j.at("right"));
    t.nodes.resize(queue.size());
  }
}

}  // namespace gbdt_detail

inline nlohmann::json to_json(const GbdtModel& m) {
  nlohmann::json j;
  j["format"] = "netrca-gbdt";
  j["version"] = kGbdtFormatVersion;
  j["loss"] = to_string(m.loss);
  j["base_score"] = m.base_score;
  j["learning_rate"] = m.learning_rate;
  j["feature_names"] = m.feature_names;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(gbdt_detail::node_to_json(m, t, 0));
  j["trees"] = trees;
  return j;
}

inline GbdtModel gbdt_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "netrca-gbdt") throw DataError("not a gbdt model document");
    const int version = j.at("version").get<int>();
    if (version != kGbdtFormatVersion) throw DataError("unsupported gbdt model version " + std::to_string(version));
    GbdtModel m;
    m.loss = loss_from_string(j.at("loss").get<std::string>());
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < m.feature_names.size(); ++i) index[m.feature_names[i]] = static_cast<int>(i);
    for (const auto& tj : j.at("trees")) {
      RegressionTree t;
      gbdt_detail::tree_from_json(tj, index, t);
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed gbdt model: ") + e.what());
  }
}

inline std::string serialize(const GbdtModel& m) { return to_json(m).dump(1); }

inline GbdtModel deserialize_gbdt(const std::string& text) {
  try {
    return gbdt_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed gbdt model: ") + e.what());
  }
}

}  // namespace netrca
