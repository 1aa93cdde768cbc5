#pragma once

// Staged refinement of per-cause GBDT decisions. Stage 0 thresholds the base
// probabilities; rules, attribution and graph stages may only add causes,
// and every addition is logged with its evidence.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netrca/attribution.hpp"
#include "netrca/core.hpp"
#include "netrca/features.hpp"
#include "netrca/gbdt.hpp"
#include "netrca/graphrank.hpp"
#include "netrca/io.hpp"
#include "netrca/ruleset.hpp"

namespace netrca {

enum class Stage { kRules, kAttribution, kGraph };

inline std::string to_string(Stage s) {
  switch (s) {
    case Stage::kRules:
      return "rules";
    case Stage::kAttribution:
      return "attribution";
    case Stage::kGraph:
      return "graph";
  }
  return "?";
}

inline Stage stage_from_string(const std::string& s) {
  if (s == "rules") return Stage::kRules;
  if (s == "attribution") return Stage::kAttribution;
  if (s == "graph") return Stage::kGraph;
  throw InvalidArgument("unknown ensemble stage '" + s + "'");
}

struct EnsemblePolicy {
  std::map<CauseId, double> decision_threshold;  // default 0.5 for unlisted causes
  double band_lo = 0.3;
  double band_hi = 0.7;
  bool rule_override = true;
  double attribution_theta = 0.5;
  double graph_margin = 0.0;
  std::set<Stage> stages = {Stage::kRules, Stage::kAttribution, Stage::kGraph};

  double threshold(CauseId c) const {
    auto it = decision_threshold.find(c);
    return it == decision_threshold.end() ? 0.5 : it->second;
  }
  bool enabled(Stage s) const { return stages.count(s) > 0; }

  void validate() const {
    if (!(band_lo <= band_hi)) throw InvalidArgument("policy: band_lo must be <= band_hi");
    if (band_lo < 0.0 || band_hi > 1.0) throw InvalidArgument("policy: band must lie in [0, 1]");
    for (const auto& [c, t] : decision_threshold) {
      if (t < 0.0 || t > 1.0) throw InvalidArgument("policy: thresholds must lie in [0, 1]");
    }
    if (attribution_theta < 0.0) throw InvalidArgument("policy: attribution_theta must be >= 0");
  }
};

struct StageEvent {
  std::string stage;  // base | rules | attribution | graph
  CauseId cause = 0;
  std::string evidence;
};

struct Prediction {
  std::string sample_id;
  CauseSet causes;
  std::map<CauseId, double> base_probability;
  CauseSet base_causes;
  std::vector<StageEvent> log;
};

// Everything `decide` may consult for one sample. Pointers for disabled
// stages may be null.
struct DecisionInputs {
  const std::map<CauseId, FeatureVector>* features = nullptr;  // per cause
  const std::map<CauseId, GbdtModel>* models = nullptr;
  const std::map<CauseId, RuleSet>* rules = nullptr;
  const AttributionMap* attribution = nullptr;  // shapley_approx importance
  const std::map<CauseId, std::vector<FeatureId>>* adjacency = nullptr;
  const std::vector<CauseScore>* graph_ranking = nullptr;
};

inline Prediction decide(const std::string& sample_id, const DecisionInputs& in, const EnsemblePolicy& policy) {
  policy.validate();
  if (!in.features || !in.models) throw InvalidArgument("decide: features and models are required");
  if (policy.enabled(Stage::kRules) && !in.rules) throw InvalidArgument("decide: rules stage enabled without rule sets");
  if (policy.enabled(Stage::kAttribution) && (!in.attribution || !in.adjacency)) {
    throw InvalidArgument("decide: attribution stage enabled without attribution evidence");
  }
  if (policy.enabled(Stage::kGraph) && !in.graph_ranking) throw InvalidArgument("decide: graph stage enabled without a ranking");

  Prediction p;
  p.sample_id = sample_id;
  char buf[64];
  for (const auto& [cause, model] : *in.models) {
    auto fv = in.features->find(cause);
    if (fv == in.features->end()) throw InvalidArgument("decide: no features for cause " + std::to_string(cause));
    const double prob = predict(model, fv->second);
    p.base_probability[cause] = prob;
    if (prob >= policy.threshold(cause)) {
      p.base_causes.insert(cause);
      std::snprintf(buf, sizeof buf, "p=%.4f", prob);
      p.log.push_back({"base", cause, buf});
    }
  }
  p.causes = p.base_causes;

  if (policy.enabled(Stage::kRules) && policy.rule_override) {
    for (const auto& [cause, rs] : *in.rules) {
      if (p.causes.count(cause)) continue;
      auto fv = in.features->find(cause);
      if (fv == in.features->end()) throw InvalidArgument("decide: no features for cause " + std::to_string(cause));
      const auto firing = apply_rules(rs, fv->second);
      if (!firing.fired) continue;
      p.causes.insert(cause);
      p.log.push_back({"rules", cause, "rule#" + std::to_string(firing.firing.front() + 1)});
    }
  }

  if (policy.enabled(Stage::kAttribution)) {
    const CauseSet roots = identify_roots(*in.attribution, policy.attribution_theta, *in.adjacency);
    for (const auto& [cause, prob] : p.base_probability) {
      if (p.causes.count(cause)) continue;
      if (prob < policy.band_lo || prob > policy.band_hi) continue;
      if (!roots.count(cause)) continue;
      p.causes.insert(cause);
      std::snprintf(buf, sizeof buf, "p=%.4f", prob);
      p.log.push_back({"attribution", cause, buf});
    }
  }

  if (policy.enabled(Stage::kGraph) && p.causes.empty() && !in.graph_ranking->empty()) {
    const bool uncertain = std::any_of(p.base_probability.begin(), p.base_probability.end(),
                                       [&](const auto& kv) { return kv.second > policy.band_lo; });
    const auto& ranking = *in.graph_ranking;
    const double runner_up = ranking.size() > 1 ? ranking[1].score : 0.0;
    if (uncertain && ranking[0].score > 0.0 && ranking[0].score - runner_up > policy.graph_margin) {
      p.causes.insert(ranking[0].cause);
      std::snprintf(buf, sizeof buf, "score=%.4f", ranking[0].score);
      p.log.push_back({"graph", ranking[0].cause, buf});
    }
  }
  return p;
}

// `sample_id: c1,c2 [stage:cause(evidence);...]`
inline std::string format_prediction(const Prediction& p) {
  std::ostringstream out;
  out << p.sample_id << ": " << format_causes(p.causes) << " [";
  for (std::size_t i = 0; i < p.log.size(); ++i) {
    if (i) out << ';';
    out << p.log[i].stage << ':' << p.log[i].cause << '(' << p.log[i].evidence << ')';
  }
  out << ']';
  return out.str();
}

}  // namespace netrca
