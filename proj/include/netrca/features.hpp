#pragma once

// Per-sample feature extraction: temporal statistics of raw KPI series,
// direction features over beam-location grid indices, X/Y ratio statistics
// and attribution scores.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"

namespace netrca {

using StatMap = std::map<std::string, double>;

struct FeatureVector {
  std::string sample_id;
  std::map<std::string, double> entries;

  double at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw InvalidArgument("feature vector " + sample_id + " has no entry " + name);
    return it->second;
  }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Quantile by linear interpolation between closest order statistics
// (`sorted` must be ascending and non-empty).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty series");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> x, double p) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

// Adjusted Fisher-Pearson sample skewness; 0 for fewer than three points or
// zero variance.
inline double skewness(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  double scale = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    scale = std::max(scale, std::abs(v));
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  const double eps = 1e-13 * std::max(scale, 1e-300);
  if (m2 <= eps * eps) return 0.0;
  const double g1 = m3 / std::pow(m2, 1.5);
  const double nd = static_cast<double>(n);
  return std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
}

// Interior points strictly greater than both neighbours.
inline int count_peaks(std::span<const double> x) {
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) ++peaks;
  }
  return peaks;
}

inline const std::vector<std::string>& temporal_stat_names() {
  static const std::vector<std::string> names = {"mean", "min", "max", "median", "q10", "q20", "q30", "q40", "q50",
                                                  "q60", "q70", "q80", "q90", "skew", "num_peaks", "mean_change"};
  return names;
}

inline StatMap temporal_stats(std::span<const double> series) {
  if (series.empty()) throw InvalidArgument("temporal_stats: empty series");
  for (double v : series) {
    if (!std::isfinite(v)) throw InvalidArgument("temporal_stats: non-finite value");
  }
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : series) sum += v;
  const std::size_t m = series.size();

  StatMap out;
  out["mean"] = sum / static_cast<double>(m);
  out["min"] = sorted.front();
  out["max"] = sorted.back();
  out["median"] = quantile_sorted(sorted, 0.5);
  for (int d = 1; d <= 9; ++d) out["q" + std::to_string(d * 10)] = quantile_sorted(sorted, d / 10.0);
  out["skew"] = skewness(series);
  out["num_peaks"] = count_peaks(series);
  out["mean_change"] = m >= 2 ? (series[m - 1] - series[0]) / static_cast<double>(m - 1) : 0.0;
  return out;
}

inline std::pair<int, int> grid_coordinates(int index, const GridShape& grid) {
  if (index < 0 || index >= grid.cells()) {
    throw InvalidArgument("grid index " + std::to_string(index) + " outside " + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols) + " grid");
  }
  if (grid.row_major) return {index / grid.cols, index % grid.cols};
  return {index % grid.rows, index / grid.rows};
}

inline const std::vector<std::string>& direction_stat_names() {
  static const std::vector<std::string> names = {"mean", "var", "min", "max", "q25", "q50", "q75"};
  return names;
}

// Statistics of the Euclidean distances between every unordered pair of
// distinct grid indices present in the slice. Keys are unprefixed
// (`mean`, `var`, ...); featurize adds the `dist_` prefix.
inline StatMap direction_features(std::span<const int> locations, const GridShape& grid) {
  std::set<int> distinct;
  for (int idx : locations) {
    grid_coordinates(idx, grid);  // range check
    distinct.insert(idx);
  }
  StatMap out;
  for (const auto& name : direction_stat_names()) out[name] = 0.0;
  if (distinct.size() < 2) return out;

  std::vector<std::pair<int, int>> coords;
  for (int idx : distinct) coords.push_back(grid_coordinates(idx, grid));
  std::vector<double> dist;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      const double dr = coords[i].first - coords[j].first;
      const double dc = coords[i].second - coords[j].second;
      dist.push_back(std::sqrt(dr * dr + dc * dc));
    }
  }
  std::sort(dist.begin(), dist.end());
  double mean = 0.0;
  for (double d : dist) mean += d;
  mean /= static_cast<double>(dist.size());
  double var = 0.0;
  for (double d : dist) var += (d - mean) * (d - mean);
  var /= static_cast<double>(dist.size());
  out["mean"] = mean;
  out["var"] = var;
  out["min"] = dist.front();
  out["max"] = dist.back();
  out["q25"] = quantile_sorted(dist, 0.25);
  out["q50"] = quantile_sorted(dist, 0.5);
  out["q75"] = quantile_sorted(dist, 0.75);
  return out;
}

// Ratio statistics for one X/Y pair; timestamps with Y == 0 are skipped.
// Keys: temporal stat names plus `degenerate` (1 when no ratio was valid).
inline StatMap ratio_stats(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("ratio_stats: length mismatch");
  std::vector<double> ratios;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (y[t] != 0.0) ratios.push_back(x[t] / y[t]);
  }
  StatMap out;
  if (ratios.empty()) {
    for (const auto& name : temporal_stat_names()) out[name] = 0.0;
    out["degenerate"] = 1.0;
    return out;
  }
  out = temporal_stats(ratios);
  out["degenerate"] = 0.0;
  return out;
}

// All pairs, keyed `ratio_p<k>_<stat>`.
inline StatMap interaction_features(const Sample& sample, std::span<const std::pair<FeatureId, FeatureId>> xy_pairs) {
  StatMap out;
  for (std::size_t k = 0; k < xy_pairs.size(); ++k) {
    const auto stats = ratio_stats(sample.series(xy_pairs[k].first), sample.series(xy_pairs[k].second));
    for (const auto& [name, v] : stats) out["ratio_p" + std::to_string(k) + "_" + name] = v;
  }
  return out;
}

// Rounded location indices of an interpolated sample.
inline std::vector<int> location_series(const Sample& sample, FeatureId location_feature) {
  std::vector<int> out;
  for (double v : sample.series(location_feature)) out.push_back(static_cast<int>(std::lround(v)));
  return out;
}

using AttributionMap = std::map<FeatureId, double>;

// Assembles the cause's configured feature set for one interpolated sample.
inline FeatureVector featurize(const Sample& sample, const FeatureSchema& schema, CauseId cause,
                               const AttributionMap* attribution = nullptr) {
  const CauseFeatureSet& fs = schema.features_for(cause);
  if (fs.raw.empty()) throw InvalidArgument("cause " + std::to_string(cause) + ": empty feature set");
  if (std::any_of(sample.missing.begin(), sample.missing.end(), [](auto m) { return m != 0; })) {
    throw InvalidArgument("featurize: sample " + sample.id + " is not interpolated");
  }
  FeatureVector fv;
  fv.sample_id = sample.id;
  for (FeatureId f : fs.raw) {
    if (!sample.column_of(f)) {
      throw DataError("featurize: schema feature " + std::to_string(f) + " absent from sample " + sample.id);
    }
    const auto prefix = "f" + std::to_string(f) + "_";
    for (const auto& [name, v] : temporal_stats(sample.series(f))) fv.entries[prefix + name] = v;
    if (schema.location_feature && f == *schema.location_feature) {
      for (const auto& [name, v] : direction_features(location_series(sample, f), schema.grid)) fv.entries["dist_" + name] = v;
    }
  }
  if (fs.interaction) {
    for (const auto& [name, v] : interaction_features(sample, schema.xy_pairs)) fv.entries[name] = v;
  }
  if (fs.attribution && attribution) {
    for (const auto& [f, v] : *attribution) fv.entries["attr_f" + std::to_string(f)] = v;
  }
  for (const auto& [name, v] : fv.entries) {
    if (!std::isfinite(v)) throw DataError("featurize: non-finite " + name + " for sample " + sample.id);
  }
  return fv;
}

// Per-feature temporal mean of every column; the summary fed to attribution.
inline std::map<FeatureId, double> column_means(const Sample& sample) {
  std::map<FeatureId, double> out;
  for (std::size_t c = 0; c < sample.num_features(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < sample.num_rows(); ++r) s += sample.values(r, c);
    out[sample.feature_ids[c]] = s / static_cast<double>(sample.num_rows());
  }
  return out;
}

}  // namespace netrca
