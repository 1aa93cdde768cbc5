#pragma once

// End-to-end training and prediction: augmentation, per-cause classifiers,
// rule mining, attribution context, graph ranking, and the ablation harness.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "netrca/attribution.hpp"
#include "netrca/augmentation.hpp"
#include "netrca/core.hpp"
#include "netrca/ensemble.hpp"
#include "netrca/eros.hpp"
#include "netrca/eval.hpp"
#include "netrca/features.hpp"
#include "netrca/gbdt.hpp"
#include "netrca/graphrank.hpp"
#include "netrca/io.hpp"
#include "netrca/parallel.hpp"
#include "netrca/ruleset.hpp"
#include "netrca/table.hpp"

namespace netrca {

struct PipelineConfig {
  std::uint64_t seed = 7;
  unsigned threads = 1;

  bool feature_engineering = true;
  bool similarity_transfer = true;
  bool timestamp_union = true;
  AugmentConfig augment;

  GbdtParams gbdt;
  bool balance_classes = true;  // positive_class_weight = #neg / #pos
  RuleParams rules;
  GbdtParams attribution_gbdt = [] {
    GbdtParams p;
    p.n_trees = 100;
    p.max_depth = 3;
    p.loss = Loss::kSquared;
    return p;
  }();
  SummaryReduction reduction = SummaryReduction::kMean;
  WalkConfig walk;
  EnsemblePolicy policy;
  double split_fraction = 942.0 / 1407.0;
};

struct TrainedModel {
  FeatureSchema schema;
  CausalGraph graph;
  bool feature_engineering = true;
  std::map<CauseId, GbdtModel> classifiers;
  std::map<CauseId, RuleSet> rules;
  std::optional<AttributionContext> attribution;
  EnsemblePolicy policy;
  WalkConfig walk;
};

struct AugmentationReport {
  TransferResult transfers;
  std::vector<UnionEvent> unions;
  std::vector<std::string> augmented_ids;  // originally unlabeled samples that gained labels
};

// Internal (non-target, non-location) feature nodes present in the data.
inline std::vector<FeatureId> attribution_features(const CausalGraph& graph, const FeatureSchema& schema,
                                                   const std::vector<FeatureId>& header) {
  std::vector<FeatureId> out;
  for (FeatureId f : graph.feature_ids()) {
    if (f == schema.target_feature) continue;
    if (schema.location_feature && f == *schema.location_feature) continue;
    if (std::find(header.begin(), header.end(), f) == header.end()) continue;
    out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Shared-feature baseline without feature engineering: the episode mean of
// every raw feature.
inline FeatureVector featurize_baseline(const Sample& sample) {
  FeatureVector fv;
  fv.sample_id = sample.id;
  for (const auto& [f, v] : column_means(sample)) fv.entries["f" + std::to_string(f) + "_mean"] = v;
  return fv;
}

inline AttributionMap sample_attribution(const AttributionContext& ctx, const Sample& sample) {
  const auto x = context_input(ctx, sample);
  return attribution_map(ctx, shapley_approx(ctx, x));
}

inline std::map<CauseId, FeatureVector> featurize_all_causes(const Sample& sample, const TrainedModel& model,
                                                             const AttributionMap* attribution) {
  std::map<CauseId, FeatureVector> out;
  for (CauseId c : model.schema.causes) {
    out[c] = model.feature_engineering ? featurize(sample, model.schema, c, attribution) : featurize_baseline(sample);
  }
  return out;
}

inline std::vector<CauseScore> graph_ranking(const Sample& sample, const TrainedModel& model) {
  const auto scores = similarity_scores(sample, model.graph, model.schema.target_feature);
  const auto weights = edge_weights(model.graph, scores);
  const auto walk = personalized_pagerank(model.graph, weights, model.walk);
  return rank_causes(model.graph, walk.pi, model.schema.adjacent);
}

// Runs both augmentation passes. `labeled` and `pool` must be interpolated;
// pool members that gain labels are appended to the returned sample list.
inline std::vector<Sample> augment_labels(const std::vector<Sample>& labeled, const std::vector<Sample>& pool,
                                          const FeatureSchema& schema, const PipelineConfig& cfg, AugmentationReport* report) {
  std::vector<Sample> out = labeled;
  AugmentationReport local;
  AugmentationReport& rep = report ? *report : local;
  if (cfg.similarity_transfer && !pool.empty() && !labeled.empty()) {
    std::vector<ErosDecomposition> ld(labeled.size());
    std::vector<ErosDecomposition> pd(pool.size());
    parallel_for(labeled.size(), cfg.threads, [&](std::size_t i) { ld[i] = decompose(labeled[i]); });
    parallel_for(pool.size(), cfg.threads, [&](std::size_t i) { pd[i] = decompose(pool[i]); });
    std::vector<ErosDecomposition> all = ld;
    all.insert(all.end(), pd.begin(), pd.end());
    const auto w = eros_weights(all);
    std::vector<LabeledDecomposition> lab;
    for (std::size_t i = 0; i < labeled.size(); ++i) lab.push_back({&ld[i], *labeled[i].label});
    rep.transfers = similarity_transfer(lab, pd, w, schema.causes, cfg.augment, cfg.threads);
    std::vector<Sample> gained = pool;
    rep.augmented_ids = apply_transfers(gained, rep.transfers);
    for (auto& s : gained) {
      if (s.label) out.push_back(std::move(s));
    }
  }
  if (cfg.timestamp_union) rep.unions = timestamp_union(out, cfg.augment.alignment_window);
  return out;
}

// Trains every artifact from interpolated samples. Labeled samples feed the
// classifiers; `pool` holds unlabeled samples used for label transfer and
// for fitting the attribution regressor.
inline TrainedModel train_pipeline(const std::vector<Sample>& labeled, const std::vector<Sample>& pool, const FeatureSchema& schema,
                                   const CausalGraph& graph, const PipelineConfig& cfg, AugmentationReport* report = nullptr) {
  if (labeled.empty()) throw InvalidArgument("train_pipeline: no labeled samples");
  TrainedModel model;
  model.schema = schema;
  model.graph = graph;
  model.feature_engineering = cfg.feature_engineering;
  model.policy = cfg.policy;
  model.walk = cfg.walk;

  const bool augment = cfg.similarity_transfer || cfg.timestamp_union;
  const std::vector<Sample> training = augment ? augment_labels(labeled, pool, schema, cfg, report) : labeled;

  const auto& header = labeled.front().feature_ids;
  const auto attr_features = attribution_features(graph, schema, header);
  const bool need_attribution =
      !attr_features.empty() && (cfg.policy.enabled(Stage::kAttribution) ||
                                 (cfg.feature_engineering && std::any_of(schema.cause_features.begin(), schema.cause_features.end(),
                                                                         [](const auto& kv) { return kv.second.attribution; })));
  if (need_attribution) {
    std::vector<const Sample*> fit;
    for (const auto& s : labeled) fit.push_back(&s);
    for (const auto& s : pool) fit.push_back(&s);
    Matrix x(fit.size(), attr_features.size());
    std::vector<double> y(fit.size());
    for (std::size_t r = 0; r < fit.size(); ++r) {
      for (std::size_t c = 0; c < attr_features.size(); ++c) x(r, c) = summarize(fit[r]->series(attr_features[c]), cfg.reduction);
      y[r] = summarize(fit[r]->series(schema.target_feature), cfg.reduction);
    }
    GbdtParams ap = cfg.attribution_gbdt;
    ap.seed = Rng::splitmix64(cfg.seed ^ 0xA77Bu);
    model.attribution = fit_context(x, y, attr_features, ap, cfg.reduction);
  }

  std::vector<AttributionMap> attr(training.size());
  if (model.attribution) {
    parallel_for(training.size(), cfg.threads, [&](std::size_t i) { attr[i] = sample_attribution(*model.attribution, training[i]); });
  }
  std::vector<std::map<CauseId, FeatureVector>> features(training.size());
  parallel_for(training.size(), cfg.threads, [&](std::size_t i) {
    features[i] = featurize_all_causes(training[i], model, model.attribution ? &attr[i] : nullptr);
  });

  for (CauseId cause : schema.causes) {
    std::vector<FeatureVector> rows;
    std::vector<double> y;
    std::vector<std::uint8_t> yb;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < training.size(); ++i) {
      rows.push_back(features[i].at(cause));
      const bool positive = training[i].label->count(cause) > 0;
      y.push_back(positive ? 1.0 : 0.0);
      yb.push_back(positive);
      pos += positive;
    }
    if (pos == 0 || pos == rows.size()) {
      throw InvalidArgument("train_pipeline: cause " + std::to_string(cause) + " needs positive and negative training samples");
    }
    const auto table = FeatureTable::from_vectors(rows);
    GbdtParams gp = cfg.gbdt;
    gp.loss = Loss::kLogistic;
    gp.seed = Rng::splitmix64(cfg.seed + static_cast<std::uint64_t>(cause));
    if (cfg.balance_classes) gp.positive_class_weight = static_cast<double>(rows.size() - pos) / static_cast<double>(pos);
    model.classifiers[cause] = train(table, y, gp);
    if (cfg.policy.enabled(Stage::kRules)) {
      RuleParams rp = cfg.rules;
      rp.seed = Rng::splitmix64(cfg.seed * 31 + static_cast<std::uint64_t>(cause));
      model.rules[cause] = mine_rules(table, yb, cause, rp);
    }
  }
  return model;
}

// Per-sample evidence and final decision.
struct SampleDiagnostics {
  AttributionMap attribution;
  std::vector<CauseScore> ranking;
};

inline Prediction predict_sample(const TrainedModel& model, const Sample& sample, SampleDiagnostics* diag = nullptr) {
  AttributionMap attr;
  if (model.attribution) attr = sample_attribution(*model.attribution, sample);
  const auto features = featurize_all_causes(sample, model, model.attribution ? &attr : nullptr);
  std::vector<CauseScore> ranking;
  if (model.policy.enabled(Stage::kGraph)) ranking = graph_ranking(sample, model);
  DecisionInputs in;
  in.features = &features;
  in.models = &model.classifiers;
  in.rules = model.policy.enabled(Stage::kRules) ? &model.rules : nullptr;
  in.attribution = model.attribution ? &attr : nullptr;
  in.adjacency = &model.schema.adjacent;
  in.graph_ranking = model.policy.enabled(Stage::kGraph) ? &ranking : nullptr;
  EnsemblePolicy policy = model.policy;
  if (!model.attribution) policy.stages.erase(Stage::kAttribution);
  auto p = decide(sample.id, in, policy);
  if (diag) {
    diag->attribution = std::move(attr);
    diag->ranking = std::move(ranking);
  }
  return p;
}

inline std::vector<Prediction> predict_all(const TrainedModel& model, const std::vector<Sample>& samples, unsigned threads,
                                           std::vector<SampleDiagnostics>* diags = nullptr) {
  std::vector<Prediction> out(samples.size());
  if (diags) diags->assign(samples.size(), {});
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    out[i] = predict_sample(model, samples[i], diags ? &(*diags)[i] : nullptr);
  });
  return out;
}

inline std::vector<Sample> interpolate_all(const std::vector<Sample>& samples, unsigned threads) {
  std::vector<Sample> out(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) { out[i] = interpolated(samples[i]); });
  return out;
}

// ---- ablation ----

enum class Variant { kBase, kBaseFE, kBaseFEGraph, kFull };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBase:
      return "XGB";
    case Variant::kBaseFE:
      return "XGB+FE";
    case Variant::kBaseFEGraph:
      return "XGB+FE+Graph";
    case Variant::kFull:
      return "NetRCA";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "XGB" || s == "base") return Variant::kBase;
  if (s == "XGB+FE" || s == "base+FE") return Variant::kBaseFE;
  if (s == "XGB+FE+Graph" || s == "base+FE+graph") return Variant::kBaseFEGraph;
  if (s == "NetRCA" || s == "full") return Variant::kFull;
  throw InvalidArgument("unknown ablation variant '" + s + "'");
}

inline PipelineConfig variant_config(PipelineConfig cfg, Variant v) {
  cfg.feature_engineering = v != Variant::kBase;
  cfg.similarity_transfer = cfg.similarity_transfer && v == Variant::kFull;
  cfg.timestamp_union = cfg.timestamp_union && v == Variant::kFull;
  switch (v) {
    case Variant::kBase:
    case Variant::kBaseFE:
      cfg.policy.stages.clear();
      break;
    case Variant::kBaseFEGraph:
      cfg.policy.stages = {Stage::kGraph};
      break;
    case Variant::kFull:
      break;
  }
  return cfg;
}

struct AblationRow {
  std::string variant;
  std::map<CauseId, double> accuracy;
  double final_score = 0.0;
  ScoreReport report;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::set<std::string> augmented_ids;  // per full variant, union over runs
  bool split_fell_back = false;
};

// Trains and evaluates each variant on one stratified split of the labeled
// samples; unlabeled samples only ever join training (as the transfer pool).
inline AblationResult run_ablation(const Dataset& dataset, const std::vector<Variant>& variants, const PipelineConfig& base_cfg) {
  const auto samples = interpolate_all(dataset.samples, base_cfg.threads);
  std::vector<SplitEntry> entries;
  std::map<std::string, const Sample*> by_id;
  std::vector<Sample> pool;
  for (const auto& s : samples) {
    by_id[s.id] = &s;
    if (s.label) {
      entries.push_back({s.id, *s.label, false});
    } else {
      pool.push_back(s);
    }
  }
  AblationResult result;
  const Split split = stratified_split(entries, base_cfg.split_fraction, base_cfg.seed);
  result.split_fell_back = split.fell_back;
  result.train_ids = split.train;
  result.validation_ids = split.validation;

  std::size_t train_pos_min = SIZE_MAX;
  for (CauseId c : dataset.schema.causes) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& id : split.train) (by_id[id]->label->count(c) ? pos : neg)++;
    train_pos_min = std::min({train_pos_min, pos, neg});
  }
  if (split.validation.size() < 2 || train_pos_min < 2) throw InvalidArgument("run_ablation: split has fewer than 2 samples per class");

  std::vector<Sample> train;
  std::vector<Sample> validation;
  for (const auto& id : split.train) train.push_back(*by_id[id]);
  for (const auto& id : split.validation) validation.push_back(*by_id[id]);
  CauseSets truth;
  for (const auto& s : validation) truth[s.id] = *s.label;

  for (Variant v : variants) {
    const auto cfg = variant_config(base_cfg, v);
    AugmentationReport rep;
    const auto model = train_pipeline(train, pool, dataset.schema, dataset.graph, cfg, &rep);
    result.augmented_ids.insert(rep.augmented_ids.begin(), rep.augmented_ids.end());
    const auto preds = predict_all(model, validation, cfg.threads);
    CauseSets pred_sets;
    for (const auto& p : preds) pred_sets[p.sample_id] = p.causes;
    AblationRow row;
    row.variant = to_string(v);
    row.report = challenge_score(pred_sets, truth);
    row.final_score = row.report.final_score;
    for (CauseId c : dataset.schema.causes) {
      auto it = row.report.per_cause.find(c);
      row.accuracy[c] = it == row.report.per_cause.end() ? 1.0 : it->second.accuracy;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

inline std::string format_ablation(const AblationResult& r, const std::vector<CauseId>& causes) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-14s", "model");
  out << buf;
  for (CauseId c : causes) {
    std::snprintf(buf, sizeof buf, " %9s", ("root" + std::to_string(c)).c_str());
    out << buf;
  }
  out << "  final_score\n";
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-14s", row.variant.c_str());
    out << buf;
    for (CauseId c : causes) {
      std::snprintf(buf, sizeof buf, " %9.5f", row.accuracy.at(c));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "  %.5f\n", row.final_score);
    out << buf;
  }
  return out.str();
}

// ---- configuration ----

inline void apply_gbdt_json(GbdtParams& p, const nlohmann::json& j) {
  p.n_trees = j.value("n_trees", p.n_trees);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
  p.l2_lambda = j.value("l2_lambda", p.l2_lambda);
  p.positive_class_weight = j.value("positive_class_weight", p.positive_class_weight);
  p.feature_subsample = j.value("feature_subsample", p.feature_subsample);
}

inline nlohmann::json policy_to_json(const EnsemblePolicy& p) {
  nlohmann::json j;
  nlohmann::json thr = nlohmann::json::object();
  for (const auto& [c, t] : p.decision_threshold) thr[std::to_string(c)] = t;
  j["decision_threshold"] = thr;
  j["band"] = {p.band_lo, p.band_hi};
  j["rule_override"] = p.rule_override;
  j["attribution_theta"] = p.attribution_theta;
  j["graph_margin"] = p.graph_margin;
  std::vector<std::string> stages;
  for (Stage s : p.stages) stages.push_back(to_string(s));
  j["stages"] = stages;
  return j;
}

inline void apply_policy_json(EnsemblePolicy& p, const nlohmann::json& j) {
  if (j.contains("decision_threshold")) {
    for (const auto& [k, v] : j["decision_threshold"].items()) p.decision_threshold[std::stoi(k)] = v.get<double>();
  }
  if (j.contains("band")) {
    p.band_lo = j["band"].at(0).get<double>();
    p.band_hi = j["band"].at(1).get<double>();
  }
  p.rule_override = j.value("rule_override", p.rule_override);
  p.attribution_theta = j.value("attribution_theta", p.attribution_theta);
  p.graph_margin = j.value("graph_margin", p.graph_margin);
  if (j.contains("stages")) {
    p.stages.clear();
    for (const auto& s : j["stages"]) p.stages.insert(stage_from_string(s.get<std::string>()));
  }
}

inline nlohmann::json walk_to_json(const WalkConfig& w) {
  return {{"damping", w.damping}, {"tolerance", w.tolerance}, {"max_iterations", w.max_iterations}};
}

inline void apply_walk_json(WalkConfig& w, const nlohmann::json& j) {
  w.damping = j.value("damping", w.damping);
  w.tolerance = j.value("tolerance", w.tolerance);
  w.max_iterations = j.value("max_iterations", w.max_iterations);
}

// Overrides from a JSON document with optional sections: augment, gbdt,
// rules, attribution, walk, policy, split_fraction.
inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
  try {
    if (j.contains("augment")) {
      const auto& a = j["augment"];
      cfg.augment.similarity_threshold = a.value("similarity_threshold", cfg.augment.similarity_threshold);
      if (a.contains("max_transfers_per_cause") && !a["max_transfers_per_cause"].is_null()) {
        cfg.augment.max_transfers_per_cause = a["max_transfers_per_cause"].get<std::size_t>();
      }
      cfg.augment.alignment_window = a.value("alignment_window", cfg.augment.alignment_window);
      cfg.similarity_transfer = a.value("similarity_transfer", cfg.similarity_transfer);
      cfg.timestamp_union = a.value("timestamp_union", cfg.timestamp_union);
    }
    if (j.contains("gbdt")) {
      apply_gbdt_json(cfg.gbdt, j["gbdt"]);
      cfg.balance_classes = j["gbdt"].value("balance_classes", cfg.balance_classes);
    }
    if (j.contains("rules")) {
      const auto& r = j["rules"];
      cfg.rules.n_estimators = r.value("n_estimators", cfg.rules.n_estimators);
      cfg.rules.max_depth = r.value("max_depth", cfg.rules.max_depth);
      cfg.rules.precision_min = r.value("precision_min", cfg.rules.precision_min);
      cfg.rules.recall_min = r.value("recall_min", cfg.rules.recall_min);
      cfg.rules.jaccard_max = r.value("jaccard_max", cfg.rules.jaccard_max);
      cfg.rules.feature_subsample = r.value("feature_subsample", cfg.rules.feature_subsample);
    }
    if (j.contains("attribution")) {
      apply_gbdt_json(cfg.attribution_gbdt, j["attribution"]);
      if (j["attribution"].contains("reduction")) cfg.reduction = reduction_from_string(j["attribution"]["reduction"].get<std::string>());
    }
    if (j.contains("walk")) apply_walk_json(cfg.walk, j["walk"]);
    if (j.contains("policy")) apply_policy_json(cfg.policy, j["policy"]);
    cfg.split_fraction = j.value("split_fraction", cfg.split_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed config: ") + e.what());
  }
}

// ---- model directory ----

inline constexpr int kModelFormatVersion = 1;

inline std::string rules_filename(CauseId c) { return "rules_cause" + std::to_string(c) + ".txt"; }

inline void save_model(const TrainedModel& m, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["format"] = "netrca-model";
  j["version"] = kModelFormatVersion;
  j["feature_engineering"] = m.feature_engineering;
  j["schema"] = schema_to_json(m.schema);
  j["policy"] = policy_to_json(m.policy);
  j["walk"] = walk_to_json(m.walk);
  nlohmann::json cls = nlohmann::json::object();
  for (const auto& [c, g] : m.classifiers) cls[std::to_string(c)] = to_json(g);
  j["classifiers"] = cls;
  if (m.attribution) {
    j["attribution"] = {{"model", to_json(m.attribution->f)},
                        {"features", m.attribution->features},
                        {"baseline", m.attribution->baseline},
                        {"reduction", to_string(m.attribution->reduction)}};
  } else {
    j["attribution"] = nullptr;
  }
  std::vector<int> rule_causes;
  for (const auto& [c, rs] : m.rules) rule_causes.push_back(c);
  j["rules"] = rule_causes;
  {
    auto out = io_detail::open_out((fs::path(dir) / "model.json").string());
    out << j.dump(1) << '\n';
  }
  {
    auto out = io_detail::open_out((fs::path(dir) / "graph.txt").string());
    write_causal_graph(out, m.graph);
  }
  for (const auto& [c, rs] : m.rules) {
    auto out = io_detail::open_out((fs::path(dir) / rules_filename(c)).string());
    out << serialize(rs);
  }
}

inline TrainedModel load_model(const std::string& dir) {
  namespace fs = std::filesystem;
  TrainedModel m;
  nlohmann::json j;
  {
    auto in = io_detail::open_in((fs::path(dir) / "model.json").string());
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(dir + "/model.json: " + e.what());
    }
  }
  try {
    if (j.at("format").get<std::string>() != "netrca-model") throw DataError(dir + ": not a model directory");
    if (j.at("version").get<int>() != kModelFormatVersion) throw DataError(dir + ": unsupported model version");
    m.feature_engineering = j.at("feature_engineering").get<bool>();
    m.schema = schema_from_json(j.at("schema"));
    apply_policy_json(m.policy, j.at("policy"));
    apply_walk_json(m.walk, j.at("walk"));
    for (const auto& [k, v] : j.at("classifiers").items()) m.classifiers[std::stoi(k)] = gbdt_from_json(v);
    if (!j.at("attribution").is_null()) {
      const auto& a = j["attribution"];
      AttributionContext ctx;
      ctx.f = gbdt_from_json(a.at("model"));
      ctx.features = a.at("features").get<std::vector<FeatureId>>();
      ctx.baseline = a.at("baseline").get<std::vector<double>>();
      ctx.reduction = reduction_from_string(a.at("reduction").get<std::string>());
      m.attribution = std::move(ctx);
    }
    for (int c : j.at("rules").get<std::vector<int>>()) {
      auto in = io_detail::open_in((fs::path(dir) / rules_filename(c)).string());
      std::stringstream buf;
      buf << in.rdbuf();
      m.rules[c] = deserialize_ruleset(buf.str());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(dir + "/model.json: " + e.what());
  }
  m.graph = load_causal_graph((fs::path(dir) / "graph.txt").string());
  return m;
}

}  // namespace netrca
