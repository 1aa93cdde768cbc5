#pragma once

// Synthetic fault-injection generator. Faults are negative level shifts on a
// cause's adjacent features over a random sub-interval; anomalies then flow
// parent -> child along the feature subgraph in one topological pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "netrca/core.hpp"
#include "netrca/parallel.hpp"
#include "netrca/random.hpp"

namespace netrca {

struct CauseInjection {
  CauseId cause = 0;
  double probability = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t n_samples = 1000;
  std::vector<CauseInjection> causes = {{1, 0.3}, {2, 0.3}, {3, 0.3}};
  int m_min = 12;
  int m_max = 40;
  double noise_std = 4.0;           // absolute, per timestamp
  double level_jitter = 0.05;       // relative per-sample level variation
  double fault_magnitude = 0.25;    // shift as a fraction of the feature level
  double default_gain = 0.6;
  std::map<std::pair<FeatureId, FeatureId>, double> edge_gains;  // overrides
  std::map<FeatureId, double> levels;                             // default 100
  double missing_rate = 0.05;
  double unlabeled_fraction = 0.3;
  Timestamp sampling_interval = 60;
  Timestamp sample_spacing = 86400;
  Timestamp start_time = 1'600'000'000;
  std::vector<FeatureId> nuisance_features;  // fault-free dips
  double nuisance_probability = 0.0;
  std::vector<CauseId> location_spread_causes;  // causes that scatter the beam location

  void validate() const {
    for (const auto& c : causes) {
      if (!(c.probability >= 0.0 && c.probability <= 1.0)) throw InvalidArgument("synth: cause probability out of [0, 1]");
    }
    if (m_min < 4 || m_max < m_min) throw InvalidArgument("synth: need 4 <= m_min <= m_max");
    if (!(noise_std >= 0.0)) throw InvalidArgument("synth: noise_std must be >= 0");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw InvalidArgument("synth: missing_rate must be in [0, 1)");
    if (!(unlabeled_fraction >= 0.0 && unlabeled_fraction < 1.0)) throw InvalidArgument("synth: unlabeled_fraction must be in [0, 1)");
    if (!std::isfinite(default_gain)) throw InvalidArgument("synth: gains must be finite");
    for (const auto& [e, g] : edge_gains) {
      if (!std::isfinite(g)) throw InvalidArgument("synth: gains must be finite");
    }
    if (!(nuisance_probability >= 0.0 && nuisance_probability <= 1.0)) throw InvalidArgument("synth: nuisance_probability out of [0, 1]");
    if (sampling_interval <= 0) throw InvalidArgument("synth: sampling_interval must be > 0");
  }
};

struct SynthResult {
  Dataset dataset;
  std::map<std::string, CauseSet> ground_truth;
};

// Feature nodes in topological order; throws on a cycle among feature nodes.
inline std::vector<std::size_t> feature_topological_order(const CausalGraph& g) {
  const std::size_t n = g.size();
  std::vector<int> indegree(n, 0);
  for (auto [p, c] : g.edges) {
    if (g.is_feature_node(p) && g.is_feature_node(c)) ++indegree[c];
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.is_feature_node(i) && indegree[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const std::size_t i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (std::size_t c : g.feature_children(i)) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  std::size_t features = 0;
  for (std::size_t i = 0; i < n; ++i) features += g.is_feature_node(i);
  if (order.size() != features) throw InvalidArgument("synth: feature subgraph of the causal graph is cyclic");
  return order;
}

namespace synth_detail {

inline void add_dip(std::vector<double>& anomaly, Rng& rng, double depth) {
  const int m = static_cast<int>(anomaly.size());
  const int len = static_cast<int>(rng.between(std::max(2, m / 4), std::max(2, (3 * m) / 4)));
  const int start = static_cast<int>(rng.between(0, m - len));
  for (int t = start; t < start + len; ++t) anomaly[t] -= depth;
}

}  // namespace synth_detail

inline SynthResult generate(const SynthConfig& cfg, const CausalGraph& graph, const FeatureSchema& schema, unsigned threads = 1) {
  cfg.validate();
  const auto topo = feature_topological_order(graph);
  std::vector<FeatureId> header = graph.feature_ids();
  std::sort(header.begin(), header.end());
  schema.validate(header);
  for (const auto& c : cfg.causes) {
    if (!schema.declares(c.cause)) throw InvalidArgument("synth: cause " + std::to_string(c.cause) + " not declared in schema");
  }
  const std::size_t n = header.size();
  auto col_of = [&](FeatureId f) { return static_cast<std::size_t>(std::find(header.begin(), header.end(), f) - header.begin()); };
  auto level_of = [&](FeatureId f) {
    auto it = cfg.levels.find(f);
    return it == cfg.levels.end() ? 100.0 : it->second;
  };
  auto gain_of = [&](FeatureId p, FeatureId c) {
    auto it = cfg.edge_gains.find({p, c});
    return it == cfg.edge_gains.end() ? cfg.default_gain : it->second;
  };
  const std::optional<FeatureId> location = schema.location_feature;

  std::vector<Sample> samples(cfg.n_samples);
  std::vector<CauseSet> truth(cfg.n_samples);
  parallel_for(cfg.n_samples, threads, [&](std::size_t k) {
    Rng rng = Rng::stream(cfg.seed, k);
    const int m = static_cast<int>(rng.between(cfg.m_min, cfg.m_max));
    CauseSet active;
    for (const auto& c : cfg.causes) {
      if (rng.bernoulli(c.probability)) active.insert(c.cause);
    }

    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", k);
    s.id = id;
    s.feature_ids = header;
    const Timestamp start = cfg.start_time + static_cast<Timestamp>(k) * cfg.sample_spacing +
                            cfg.sampling_interval * rng.between(0, 59);
    for (int t = 0; t < m; ++t) s.timestamps.push_back(start + t * cfg.sampling_interval);

    std::vector<std::vector<double>> anomaly(n, std::vector<double>(m, 0.0));
    for (CauseId c : active) {
      auto adj = schema.adjacent.find(c);
      if (adj == schema.adjacent.end()) continue;
      for (FeatureId f : adj->second) {
        const double depth = cfg.fault_magnitude * level_of(f) * rng.uniform(0.7, 1.3);
        synth_detail::add_dip(anomaly[col_of(f)], rng, depth);
      }
    }
    for (FeatureId f : cfg.nuisance_features) {
      if (rng.bernoulli(cfg.nuisance_probability)) {
        synth_detail::add_dip(anomaly[col_of(f)], rng, cfg.fault_magnitude * level_of(f) * rng.uniform(0.7, 1.3));
      }
    }
    for (std::size_t node : topo) {
      const FeatureId pf = *CausalGraph::parse_feature_node(graph.nodes[node]);
      if (location && pf == *location) continue;
      for (std::size_t child : graph.feature_children(node)) {
        const FeatureId cf = *CausalGraph::parse_feature_node(graph.nodes[child]);
        if (location && cf == *location) continue;
        const double gain = gain_of(pf, cf);
        auto& src = anomaly[col_of(pf)];
        auto& dst = anomaly[col_of(cf)];
        for (int t = 0; t < m; ++t) dst[t] += gain * src[t];
      }
    }

    s.values = Matrix(m, n);
    for (std::size_t c = 0; c < n; ++c) {
      const FeatureId f = header[c];
      if (location && f == *location) {
        const bool spread = std::any_of(cfg.location_spread_causes.begin(), cfg.location_spread_causes.end(),
                                        [&](CauseId lc) { return active.count(lc) > 0; });
        const int cells = schema.grid.cells();
        const int center = static_cast<int>(rng.below(static_cast<std::uint64_t>(cells)));
        for (int t = 0; t < m; ++t) {
          int idx = center;
          if (spread) {
            idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(cells)));
          } else if (rng.bernoulli(0.3)) {
            idx = (center + 1) % cells;
          }
          s.values(t, c) = idx;
        }
        continue;
      }
      const double level = level_of(f) * (1.0 + cfg.level_jitter * rng.normal());
      for (int t = 0; t < m; ++t) {
        // Quantized to 1e-4 like exported telemetry; keeps CSV output compact.
        s.values(t, c) = std::round((level + anomaly[c][t] + cfg.noise_std * rng.normal()) * 1e4) / 1e4;
      }
    }

    s.missing.assign(static_cast<std::size_t>(m) * n, 0);
    if (cfg.missing_rate > 0.0) {
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t observed = 0;
        for (int t = 0; t < m; ++t) {
          const bool miss = rng.bernoulli(cfg.missing_rate);
          s.missing[t * n + c] = miss;
          observed += !miss;
        }
        if (observed == 0) s.missing[c] = 0;
      }
      for (std::size_t i = 0; i < s.missing.size(); ++i) {
        if (s.missing[i]) s.values.data[i] = 0.0;
      }
    }

    if (!rng.bernoulli(cfg.unlabeled_fraction)) s.label = active;
    truth[k] = active;
    samples[k] = std::move(s);
  });

  SynthResult out;
  out.dataset.feature_ids = header;
  out.dataset.samples = std::move(samples);
  out.dataset.schema = schema;
  out.dataset.graph = graph;
  for (std::size_t k = 0; k < cfg.n_samples; ++k) out.ground_truth[out.dataset.samples[k].id] = truth[k];
  return out;
}

// Reference topology modelled on the challenge layout: feature 0 is the
// degraded target; causes 1/2/3 sit next to features {13, 15}, {19} and {60};
// feature 20 is the beam-location index on a 4x8 grid; (61, 28) and (69, 36)
// are X/Y pairs; 5 and 7 are fault-free distractors.
inline CausalGraph reference_graph() {
  CausalGraph g;
  g.nodes = {"0", "5", "7", "13", "15", "19", "20", "28", "36", "60", "61", "69", "R1", "R2", "R3"};
  auto at = [&](const std::string& s) { return *g.index_of(s); };
  const std::vector<std::pair<std::string, std::string>> edges = {
      {"R1", "13"}, {"R1", "15"}, {"R2", "19"}, {"R3", "60"}, {"13", "0"},  {"15", "0"},  {"19", "0"}, {"60", "0"},
      {"20", "19"}, {"60", "28"}, {"60", "36"}, {"28", "61"}, {"36", "69"}, {"5", "7"},   {"7", "0"}};
  for (const auto& [p, c] : edges) g.edges.emplace_back(at(p), at(c));
  g.target = at("0");
  return g;
}

inline FeatureSchema reference_schema() {
  FeatureSchema s;
  s.target_feature = 0;
  s.causes = {1, 2, 3};
  s.adjacent = {{1, {13, 15}}, {2, {19}}, {3, {60}}};
  s.location_feature = 20;
  s.grid = GridShape{4, 8, true};
  s.xy_pairs = {{61, 28}, {69, 36}};
  s.cause_features = {{1, CauseFeatureSet{{0, 13, 15}, false, true}},
                      {2, CauseFeatureSet{{0, 19, 20}, false, true}},
                      {3, CauseFeatureSet{{0, 28, 36, 60}, true, true}}};
  return s;
}

inline SynthConfig reference_config() {
  SynthConfig c;
  c.seed = 7;
  c.n_samples = 1000;
  c.unlabeled_fraction = 0.3;
  c.missing_rate = 0.05;
  c.noise_std = 4.0;
  c.fault_magnitude = 0.2;
  c.level_jitter = 0.2;
  c.nuisance_features = {5};
  c.nuisance_probability = 0.25;
  c.location_spread_causes = {2};
  c.levels = {{61, 200.0}, {69, 200.0}};
  return c;
}

// Overrides from JSON; keys mirror SynthConfig field names. `causes` is a
// list of {"cause", "probability"}, `levels` maps feature id to level and
// `edge_gains` is a list of {"parent", "child", "gain"}.
inline void apply_synth_json(SynthConfig& c, const nlohmann::json& j) {
  try {
    c.seed = j.value("seed", c.seed);
    c.n_samples = j.value("n_samples", c.n_samples);
    if (j.contains("causes")) {
      c.causes.clear();
      for (const auto& e : j["causes"]) c.causes.push_back({e.at("cause").get<CauseId>(), e.at("probability").get<double>()});
    }
    c.m_min = j.value("m_min", c.m_min);
    c.m_max = j.value("m_max", c.m_max);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.level_jitter = j.value("level_jitter", c.level_jitter);
    c.fault_magnitude = j.value("fault_magnitude", c.fault_magnitude);
    c.default_gain = j.value("default_gain", c.default_gain);
    if (j.contains("edge_gains")) {
      for (const auto& e : j["edge_gains"]) {
        c.edge_gains[{e.at("parent").get<FeatureId>(), e.at("child").get<FeatureId>()}] = e.at("gain").get<double>();
      }
    }
    if (j.contains("levels")) {
      for (const auto& [k, v] : j["levels"].items()) c.levels[std::stoi(k)] = v.get<double>();
    }
    c.missing_rate = j.value("missing_rate", c.missing_rate);
    c.unlabeled_fraction = j.value("unlabeled_fraction", c.unlabeled_fraction);
    c.sampling_interval = j.value("sampling_interval", c.sampling_interval);
    c.sample_spacing = j.value("sample_spacing", c.sample_spacing);
    c.start_time = j.value("start_time", c.start_time);
    if (j.contains("nuisance_features")) c.nuisance_features = j["nuisance_features"].get<std::vector<FeatureId>>();
    c.nuisance_probability = j.value("nuisance_probability", c.nuisance_probability);
    if (j.contains("location_spread_causes")) c.location_spread_causes = j["location_spread_causes"].get<std::vector<CauseId>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed synth config: ") + e.what());
  }
}

}  // namespace netrca
