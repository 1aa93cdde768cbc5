#pragma once

// Shapley-style importance of internal graph features on the target feature.
// A squared-loss GBDT `f` maps per-sample summaries of the internal features
// to the target summary; absent features are replaced by their training mean.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"
#include "netrca/gbdt.hpp"
#include "netrca/table.hpp"

namespace netrca {

enum class SummaryReduction { kMean, kMin };

inline std::string to_string(SummaryReduction r) { return r == SummaryReduction::kMean ? "mean" : "min"; }

inline SummaryReduction reduction_from_string(const std::string& s) {
  if (s == "mean") return SummaryReduction::kMean;
  if (s == "min") return SummaryReduction::kMin;
  throw InvalidArgument("unknown summary reduction '" + s + "'");
}

inline double summarize(std::span<const double> series, SummaryReduction r) {
  if (series.empty()) throw InvalidArgument("summarize: empty series");
  if (r == SummaryReduction::kMin) return *std::min_element(series.begin(), series.end());
  double s = 0.0;
  for (double v : series) s += v;
  return s / static_cast<double>(series.size());
}

struct AttributionContext {
  GbdtModel f;
  std::vector<FeatureId> features;  // S, in model column order
  std::vector<double> baseline;     // column means over the fitting table
  SummaryReduction reduction = SummaryReduction::kMean;

  std::size_t size() const { return features.size(); }
  double evaluate(std::span<const double> x) const { return f.predict_row(x); }
  friend bool operator==(const AttributionContext&, const AttributionContext&) = default;
};

inline std::vector<std::string> attribution_column_names(std::span<const FeatureId> features) {
  std::vector<std::string> names;
  for (FeatureId id : features) names.push_back("f" + std::to_string(id));
  return names;
}

// `summaries` is rows x |features|; `target` holds the target summary per row.
inline AttributionContext fit_context(const Matrix& summaries, std::span<const double> target, std::vector<FeatureId> features,
                                      GbdtParams params, SummaryReduction reduction = SummaryReduction::kMean) {
  if (summaries.rows < 2) throw InvalidArgument("fit_context: need at least 2 rows");
  if (summaries.cols != features.size()) throw InvalidArgument("fit_context: column count does not match feature list");
  params.loss = Loss::kSquared;
  AttributionContext ctx;
  ctx.features = std::move(features);
  ctx.reduction = reduction;
  ctx.f = train(FeatureTable::from_columns(attribution_column_names(ctx.features), summaries), target, params);
  ctx.baseline.assign(summaries.cols, 0.0);
  for (std::size_t r = 0; r < summaries.rows; ++r)
    for (std::size_t c = 0; c < summaries.cols; ++c) ctx.baseline[c] += summaries(r, c);
  for (double& v : ctx.baseline) v /= static_cast<double>(summaries.rows);
  return ctx;
}

// Summary vector of one interpolated sample over the context's features.
inline std::vector<double> context_input(const AttributionContext& ctx, const Sample& sample) {
  std::vector<double> x;
  for (FeatureId f : ctx.features) x.push_back(summarize(sample.series(f), ctx.reduction));
  return x;
}

inline constexpr std::size_t kMaxExactShapleyFeatures = 12;

// Exact Shapley values by subset enumeration with mean substitution.
inline std::vector<double> shapley_exact(const AttributionContext& ctx, std::span<const double> x) {
  const std::size_t p = ctx.size();
  if (x.size() != p) throw InvalidArgument("shapley_exact: input length does not match context");
  if (p > kMaxExactShapleyFeatures) {
    throw InvalidArgument("shapley_exact: " + std::to_string(p) + " features exceeds the exact limit of " +
                          std::to_string(kMaxExactShapleyFeatures) + "; use shapley_approx");
  }
  const std::size_t masks = std::size_t{1} << p;
  std::vector<double> value(masks);
  std::vector<double> input(p);
  for (std::size_t mask = 0; mask < masks; ++mask) {
    for (std::size_t j = 0; j < p; ++j) input[j] = (mask >> j) & 1U ? x[j] : ctx.baseline[j];
    value[mask] = ctx.evaluate(input);
  }
  // weight[k] = k!(p-k-1)!/p!
  std::vector<double> weight(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double w = 1.0 / static_cast<double>(p);
    // 1/p * 1/C(p-1, k)
    double binom = 1.0;
    for (std::size_t j = 1; j <= k; ++j) binom = binom * static_cast<double>(p - 1 - k + j) / static_cast<double>(j);
    weight[k] = w / binom;
  }
  std::vector<double> phi(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      if (mask & bit) continue;
      const auto k = static_cast<std::size_t>(std::popcount(mask));
      phi[i] += weight[k] * (value[mask | bit] - value[mask]);
    }
  }
  return phi;
}

// Single-removal approximation: |f(x) - f(x with x_i := mean_i)|.
inline std::vector<double> shapley_approx(const AttributionContext& ctx, std::span<const double> x) {
  const std::size_t p = ctx.size();
  if (x.size() != p) throw InvalidArgument("shapley_approx: input length does not match context");
  const double full = ctx.evaluate(x);
  std::vector<double> input(x.begin(), x.end());
  std::vector<double> phi(p);
  for (std::size_t i = 0; i < p; ++i) {
    input[i] = ctx.baseline[i];
    phi[i] = std::abs(full - ctx.evaluate(input));
    input[i] = x[i];
  }
  return phi;
}

inline AttributionMap attribution_map(const AttributionContext& ctx, std::span<const double> phi) {
  AttributionMap out;
  for (std::size_t i = 0; i < ctx.size(); ++i) out[ctx.features[i]] = phi[i];
  return out;
}

// Causes whose adjacent features carry max-normalized importance strictly
// above `theta`.
inline CauseSet identify_roots(const AttributionMap& importance, double theta, const std::map<CauseId, std::vector<FeatureId>>& adjacent) {
  if (theta < 0.0) throw InvalidArgument("identify_roots: theta must be >= 0");
  double peak = 0.0;
  for (const auto& [f, v] : importance) peak = std::max(peak, v);
  CauseSet out;
  if (peak <= 0.0) return out;
  for (const auto& [cause, features] : adjacent) {
    for (FeatureId f : features) {
      auto it = importance.find(f);
      if (it != importance.end() && it->second / peak > theta) {
        out.insert(cause);
        break;
      }
    }
  }
  return out;
}

}  // namespace netrca
