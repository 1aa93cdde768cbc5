#pragma once

// Domain types shared by every stage: telemetry samples, the causal graph,
// the feature schema and missing-value interpolation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netrca/error.hpp"

namespace netrca {

using FeatureId = int;
using CauseId = int;
using CauseSet = std::set<CauseId>;
using Timestamp = std::int64_t;

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
    return out;
  }
  void set_column(std::size_t c, std::span<const double> v) {
    for (std::size_t r = 0; r < rows; ++r) (*this)(r, c) = v[r];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// One telemetry episode. `label == std::nullopt` means Unlabeled; an empty
// set means labeled fault-free.
struct Sample {
  std::string id;
  std::vector<FeatureId> feature_ids;  // column order
  std::vector<Timestamp> timestamps;
  Matrix values;
  std::vector<std::uint8_t> missing;  // row-major, same shape as values
  std::optional<CauseSet> label;

  std::size_t num_rows() const { return timestamps.size(); }
  std::size_t num_features() const { return feature_ids.size(); }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * values.cols + c] != 0; }
  bool labeled() const { return label.has_value(); }

  std::optional<std::size_t> column_of(FeatureId f) const {
    auto it = std::find(feature_ids.begin(), feature_ids.end(), f);
    if (it == feature_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_ids.begin());
  }

  // Column values for feature `f`; throws if the feature is absent.
  std::vector<double> series(FeatureId f) const {
    auto c = column_of(f);
    if (!c) throw DataError("sample " + id + ": feature " + std::to_string(f) + " not present");
    return values.column(*c);
  }

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Directed graph over feature nodes (decimal ids) and root-cause nodes
// (`R<cause>`). Original edge orientation is kept; walks use the undirected
// closure over feature nodes.
struct CausalGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent -> child
  std::size_t target = 0;

  std::size_t size() const { return nodes.size(); }

  std::optional<std::size_t> index_of(const std::string& node) const {
    auto it = std::find(nodes.begin(), nodes.end(), node);
    if (it == nodes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
  }
  std::optional<std::size_t> index_of_feature(FeatureId f) const { return index_of(std::to_string(f)); }

  bool has_edge(std::size_t from, std::size_t to) const {
    return std::find(edges.begin(), edges.end(), std::pair{from, to}) != edges.end();
  }

  // Directed adjacency A(i, j) = 1 iff edge i -> j.
  std::vector<std::vector<std::uint8_t>> adjacency() const {
    std::vector<std::vector<std::uint8_t>> a(size(), std::vector<std::uint8_t>(size(), 0));
    for (auto [p, c] : edges) a[p][c] = 1;
    return a;
  }

  static std::optional<FeatureId> parse_feature_node(const std::string& node) {
    if (node.empty()) return std::nullopt;
    std::size_t i = node[0] == '-' ? 1 : 0;
    if (i == node.size()) return std::nullopt;
    for (std::size_t k = i; k < node.size(); ++k) {
      if (node[k] < '0' || node[k] > '9') return std::nullopt;
    }
    return std::stoi(node);
  }
  bool is_feature_node(std::size_t i) const { return parse_feature_node(nodes[i]).has_value(); }

  // Children of `i` restricted to feature nodes, in index order.
  std::vector<std::size_t> feature_children(std::size_t i) const {
    std::vector<std::size_t> out;
    for (auto [p, c] : edges) {
      if (p == i && is_feature_node(c)) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Feature ids of every feature node, in node order.
  std::vector<FeatureId> feature_ids() const {
    std::vector<FeatureId> out;
    for (const auto& n : nodes) {
      if (auto f = parse_feature_node(n)) out.push_back(*f);
    }
    return out;
  }

  friend bool operator==(const CausalGraph&, const CausalGraph&) = default;
};

struct GridShape {
  int rows = 4;
  int cols = 8;
  bool row_major = true;
  int cells() const { return rows * cols; }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// Which derived features feed the classifier for one cause.
struct CauseFeatureSet {
  std::vector<FeatureId> raw;  // temporal stats of these; direction features if it lists the location feature
  bool interaction = false;    // X/Y ratio statistics
  bool attribution = false;    // attr_f<k> entries when an attribution map is supplied
  friend bool operator==(const CauseFeatureSet&, const CauseFeatureSet&) = default;
};

struct FeatureSchema {
  FeatureId target_feature = 0;
  std::vector<CauseId> causes;
  std::map<CauseId, std::vector<FeatureId>> adjacent;  // cause -> adjacent feature nodes
  std::optional<FeatureId> location_feature;
  GridShape grid;
  std::vector<std::pair<FeatureId, FeatureId>> xy_pairs;  // (X, Y)
  std::map<CauseId, CauseFeatureSet> cause_features;

  bool declares(CauseId c) const { return std::find(causes.begin(), causes.end(), c) != causes.end(); }

  const CauseFeatureSet& features_for(CauseId c) const {
    auto it = cause_features.find(c);
    if (it == cause_features.end()) throw InvalidArgument("schema has no feature set for cause " + std::to_string(c));
    return it->second;
  }

  // Checks every referenced id against the dataset header.
  void validate(std::span<const FeatureId> header) const {
    auto known = [&](FeatureId f) { return std::find(header.begin(), header.end(), f) != header.end(); };
    auto require = [&](FeatureId f, const std::string& what) {
      if (!known(f)) throw DataError("schema " + what + " references unknown feature " + std::to_string(f));
    };
    require(target_feature, "target_feature");
    if (location_feature) require(*location_feature, "location_feature");
    if (grid.rows <= 0 || grid.cols <= 0) throw DataError("schema grid shape must be positive");
    for (const auto& [c, fs] : adjacent) {
      if (!declares(c)) throw DataError("schema adjacency names undeclared cause " + std::to_string(c));
      for (FeatureId f : fs) require(f, "adjacency");
    }
    for (auto [x, y] : xy_pairs) {
      require(x, "xy_pairs");
      require(y, "xy_pairs");
    }
    for (const auto& [c, fs] : cause_features) {
      if (!declares(c)) throw DataError("schema feature set names undeclared cause " + std::to_string(c));
      for (FeatureId f : fs.raw) require(f, "cause_features");
      if (fs.interaction && xy_pairs.empty()) {
        throw DataError("schema enables interaction features for cause " + std::to_string(c) + " but xy_pairs is empty");
      }
    }
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

struct Dataset {
  std::vector<FeatureId> feature_ids;
  std::vector<Sample> samples;
  FeatureSchema schema;
  CausalGraph graph;

  const Sample* find(const std::string& id) const {
    for (const auto& s : samples) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }
};

// Fills gaps in `series` (mask[i] != 0 marks a missing entry): linear
// interpolation between the nearest observed neighbours inside, constant
// extension of the nearest observed value at either end.
inline std::vector<double> interpolate_missing(std::span<const double> series, std::span<const std::uint8_t> mask) {
  if (series.size() != mask.size()) throw InvalidArgument("interpolate_missing: series/mask length mismatch");
  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!mask[i]) observed.push_back(i);
  }
  if (observed.empty()) throw DataError("interpolate_missing: no observed values");

  std::vector<double> out(series.begin(), series.end());
  for (std::size_t i = 0; i < observed.front(); ++i) out[i] = series[observed.front()];
  for (std::size_t i = observed.back() + 1; i < series.size(); ++i) out[i] = series[observed.back()];
  for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
    const std::size_t a = observed[k];
    const std::size_t b = observed[k + 1];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = series[a] + t * (series[b] - series[a]);
    }
  }
  return out;
}

// Sample with every column interpolated and the mask cleared.
inline Sample interpolated(const Sample& s) {
  Sample out = s;
  const std::size_t m = s.num_rows();
  const std::size_t n = s.num_features();
  std::vector<std::uint8_t> mask(m);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < m; ++r) mask[r] = s.missing[r * n + c];
    auto col = s.values.column(c);
    try {
      out.values.set_column(c, interpolate_missing(col, mask));
    } catch (const DataError&) {
      throw DataError("sample " + s.id + ": feature " + std::to_string(s.feature_ids[c]) + " has no observed values");
    }
  }
  std::fill(out.missing.begin(), out.missing.end(), 0);
  return out;
}

inline std::string format_causes(const CauseSet& causes) {
  std::string out;
  for (CauseId c : causes) {
    if (!out.empty()) out += ',';
    out += std::to_string(c);
  }
  return out;
}

}  // namespace netrca
