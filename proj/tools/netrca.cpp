// netrca: command-line front end for the root-cause pipeline.
//
// A dataset directory holds data.csv, schema.json, graph.txt and (optionally)
// labels.tsv; `synth` also writes truth.tsv. Exit codes: 0 success, 1 usage
// error, 2 data or validation error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netrca/netrca.hpp"

namespace fs = std::filesystem;
using namespace netrca;

namespace {

enum class LogLevel { kError, kWarn, kInfo, kDebug };

LogLevel log_level() {
  const char* env = std::getenv("NETRCA_LOG");
  if (!env) return LogLevel::kWarn;
  const std::string v = env;
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[netrca " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// Logs the wall time of one stage at info level when it goes out of scope.
class StageTimer {
 public:
  explicit StageTimer(std::string name) : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f s", s);
    log(LogLevel::kInfo, name_ + ": " + buf);
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

struct Common {
  std::uint64_t seed = 7;
  unsigned threads = 0;
  std::string config;

  unsigned thread_count() const { return threads ? threads : default_threads(); }
};

nlohmann::json read_json(const std::string& path) {
  auto in = io_detail::open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

PipelineConfig pipeline_config(const Common& common) {
  PipelineConfig cfg;
  cfg.seed = common.seed;
  cfg.threads = common.thread_count();
  if (!common.config.empty()) apply_config_json(cfg, read_json(common.config));
  return cfg;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Dataset load_dataset_dir(const std::string& dir, const std::string& labels_override = {}, bool require_graph = true) {
  DatasetFiles files;
  files.data = in_dir(dir, "data.csv");
  files.schema = in_dir(dir, "schema.json");
  const std::string labels = labels_override.empty() ? in_dir(dir, "labels.tsv") : labels_override;
  if (fs::exists(labels)) files.labels = labels;
  const std::string graph = in_dir(dir, "graph.txt");
  if (fs::exists(graph)) {
    files.graph = graph;
  } else if (require_graph) {
    throw DataError(dir + ": missing graph.txt");
  }
  StageTimer t("load " + dir);
  return load_dataset(files);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  auto out = io_detail::open_out(path);
  out << text;
}

// ---- subcommands ----

int run_synth(const Common& common, const std::string& out_dir, const std::string& synth_config, std::optional<std::size_t> samples) {
  SynthConfig cfg = reference_config();
  if (!synth_config.empty()) apply_synth_json(cfg, read_json(synth_config));
  cfg.seed = common.seed;
  if (samples) cfg.n_samples = *samples;
  SynthResult r;
  {
    StageTimer t("synth");
    r = generate(cfg, reference_graph(), reference_schema(), common.thread_count());
  }
  fs::create_directories(out_dir);
  write_dataset(r.dataset, in_dir(out_dir, "data.csv"), in_dir(out_dir, "labels.tsv"));
  write_schema(in_dir(out_dir, "schema.json"), r.dataset.schema);
  {
    auto g = io_detail::open_out(in_dir(out_dir, "graph.txt"));
    write_causal_graph(g, r.dataset.graph);
  }
  std::vector<std::pair<std::string, std::optional<CauseSet>>> truth;
  for (const auto& [id, causes] : r.ground_truth) truth.emplace_back(id, causes);
  write_label_file(in_dir(out_dir, "truth.tsv"), truth);
  log(LogLevel::kInfo, "wrote " + std::to_string(r.dataset.samples.size()) + " samples to " + out_dir);
  return 0;
}

int run_featurize(const Common& common, const std::string& dataset_dir, CauseId cause, const std::string& model_dir, const std::string& out) {
  const Dataset d = load_dataset_dir(dataset_dir, {}, false);
  if (!d.schema.declares(cause)) throw DataError("cause " + std::to_string(cause) + " is not declared in the schema");
  std::optional<TrainedModel> model;
  if (!model_dir.empty()) model = load_model(model_dir);
  const auto samples = interpolate_all(d.samples, common.thread_count());
  std::vector<FeatureVector> rows(samples.size());
  {
    StageTimer t("featurize");
    parallel_for(samples.size(), common.thread_count(), [&](std::size_t i) {
      AttributionMap attr;
      if (model && model->attribution) attr = sample_attribution(*model->attribution, samples[i]);
      rows[i] = featurize(samples[i], d.schema, cause, model && model->attribution ? &attr : nullptr);
    });
  }
  const auto table = FeatureTable::from_vectors(rows);
  std::ostringstream text;
  text << "sample_id";
  for (const auto& n : table.names) text << ',' << n;
  text << ",label\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    text << table.row_ids[r];
    for (std::size_t c = 0; c < table.names.size(); ++c) text << ',' << format_double(table.x(r, c));
    text << ',' << (samples[r].label ? (samples[r].label->count(cause) ? "1" : "0") : "NA") << '\n';
  }
  write_text(out, text.str());
  return 0;
}

int run_augment(const Common& common, const std::string& dataset_dir, const std::string& out, const std::string& report_path,
                const std::string& dump_similarity, std::optional<double> tau, std::optional<std::size_t> max_transfers,
                std::optional<Timestamp> window) {
  PipelineConfig cfg = pipeline_config(common);
  if (tau) cfg.augment.similarity_threshold = *tau;
  if (max_transfers) cfg.augment.max_transfers_per_cause = *max_transfers;
  if (window) cfg.augment.alignment_window = *window;
  cfg.augment.validate();
  Dataset d = load_dataset_dir(dataset_dir, {}, false);
  const auto samples = interpolate_all(d.samples, cfg.threads);
  std::vector<Sample> labeled;
  std::vector<Sample> pool;
  for (const auto& s : samples) (s.label ? labeled : pool).push_back(s);

  AugmentationReport rep;
  std::vector<Sample> augmented;
  {
    StageTimer t("augment");
    augmented = augment_labels(labeled, pool, d.schema, cfg, &rep);
  }
  std::map<std::string, CauseSet> new_labels;
  for (const auto& s : augmented) new_labels[s.id] = *s.label;
  std::vector<std::pair<std::string, std::optional<CauseSet>>> labels;
  for (const auto& s : d.samples) {
    auto it = new_labels.find(s.id);
    labels.emplace_back(s.id, it == new_labels.end() ? std::optional<CauseSet>{} : std::optional<CauseSet>{it->second});
  }
  write_label_file(out, labels);

  std::ostringstream report;
  report << "# similarity transfers: " << rep.transfers.transfer_count() << '\n';
  for (const auto& r : rep.transfers.records) {
    for (const auto& p : r.provenance) {
      report << "transfer\t" << r.sample_id << "\tcause=" << p.cause << "\tsource=" << p.source_id << "\tsimilarity=" << format_double(p.similarity)
             << '\n';
    }
  }
  report << "# timestamp unions: " << rep.unions.size() << '\n';
  for (const auto& u : rep.unions) {
    report << "union\t" << u.sample_id << "\tbefore=" << format_causes(u.before) << "\tafter=" << format_causes(u.after)
           << (u.negative_to_positive ? "\tnegative_to_positive" : "") << '\n';
  }
  for (const auto& w : rep.transfers.warnings) {
    report << "# warning: " << w << '\n';
    log(LogLevel::kWarn, w);
  }
  write_text(report_path, report.str());

  if (!dump_similarity.empty()) {
    std::vector<ErosDecomposition> ld(labeled.size());
    std::vector<ErosDecomposition> pd(pool.size());
    parallel_for(labeled.size(), cfg.threads, [&](std::size_t i) { ld[i] = decompose(labeled[i]); });
    parallel_for(pool.size(), cfg.threads, [&](std::size_t i) { pd[i] = decompose(pool[i]); });
    std::vector<ErosDecomposition> all = ld;
    all.insert(all.end(), pd.begin(), pd.end());
    const auto w = eros_weights(all);
    auto dump = io_detail::open_out(dump_similarity);
    dump << "unlabeled_id\tlabeled_id\teros\n";
    for (const auto& u : pd) {
      for (const auto& l : ld) dump << u.sample_id << '\t' << l.sample_id << '\t' << format_double(eros(u, l, w)) << '\n';
    }
  }
  return 0;
}

int run_train(const Common& common, const std::string& dataset_dir, const std::string& labels, const std::string& out_dir) {
  const PipelineConfig cfg = pipeline_config(common);
  const Dataset d = load_dataset_dir(dataset_dir, labels);
  const auto samples = interpolate_all(d.samples, cfg.threads);
  std::vector<Sample> labeled;
  std::vector<Sample> pool;
  for (const auto& s : samples) (s.label ? labeled : pool).push_back(s);
  AugmentationReport rep;
  TrainedModel model;
  {
    StageTimer t("train");
    model = train_pipeline(labeled, pool, d.schema, d.graph, cfg, &rep);
  }
  log(LogLevel::kInfo, "label transfers: " + std::to_string(rep.transfers.transfer_count()) + ", timestamp unions: " + std::to_string(rep.unions.size()));
  for (const auto& w : rep.transfers.warnings) log(LogLevel::kWarn, w);
  save_model(model, out_dir);
  return 0;
}

int run_predict(const Common& common, const std::string& model_dir, const std::string& dataset_dir, const std::string& out,
                const std::string& dump_ranking, const std::vector<std::string>& stages) {
  TrainedModel model = load_model(model_dir);
  if (!stages.empty()) {
    model.policy.stages.clear();
    for (const auto& s : stages) {
      if (s != "none") model.policy.stages.insert(stage_from_string(s));
    }
  }
  const Dataset d = load_dataset_dir(dataset_dir, {}, false);
  const auto samples = interpolate_all(d.samples, common.thread_count());
  std::vector<SampleDiagnostics> diags;
  std::vector<Prediction> preds;
  {
    StageTimer t("predict");
    preds = predict_all(model, samples, common.thread_count(), dump_ranking.empty() ? nullptr : &diags);
  }
  std::ostringstream text;
  for (const auto& p : preds) text << format_prediction(p) << '\n';
  write_text(out, text.str());

  if (!dump_ranking.empty()) {
    auto dump = io_detail::open_out(dump_ranking);
    dump << "sample_id\trank\tcause\tscore\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& ranking = diags[i].ranking.empty() ? graph_ranking(samples[i], model) : diags[i].ranking;
      for (std::size_t k = 0; k < ranking.size(); ++k) {
        dump << preds[i].sample_id << '\t' << k + 1 << '\t' << ranking[k].cause << '\t' << format_double(ranking[k].score) << '\n';
      }
    }
  }
  return 0;
}

int run_score(const std::string& pred_path, const std::string& truth_path, const std::string& out) {
  const auto preds = read_label_file(pred_path);
  const auto truth = read_label_file(truth_path);
  CauseSets p;
  CauseSets t;
  for (const auto& [id, label] : truth) {
    if (!label) continue;
    t[id] = *label;
    auto it = preds.find(id);
    if (it == preds.end() || !it->second) throw DataError(pred_path + ": no prediction for sample " + id);
    p[id] = *it->second;
  }
  const ScoreReport r = challenge_score(p, t);
  std::cout << format_report(r);
  if (!out.empty()) write_text(out, format_report_kv(r));
  return 0;
}

int run_explain(const Common& common, const std::string& model_dir, const std::string& dataset_dir, const std::vector<std::string>& ids) {
  const TrainedModel model = load_model(model_dir);
  for (const auto& [cause, rs] : model.rules) std::cout << explain(rs) << '\n';
  if (dataset_dir.empty()) return 0;
  const Dataset d = load_dataset_dir(dataset_dir, {}, false);
  const std::set<std::string> wanted(ids.begin(), ids.end());
  for (const auto& raw : d.samples) {
    if (!wanted.empty() && !wanted.count(raw.id)) continue;
    const Sample s = interpolated(raw);
    SampleDiagnostics diag;
    const Prediction p = predict_sample(model, s, &diag);
    std::cout << "sample " << s.id << ": " << format_causes(p.causes) << '\n';
    if (!diag.attribution.empty()) {
      std::cout << "  attribution (phi):\n";
      for (const auto& [f, v] : diag.attribution) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "    f%-4d %12.6f\n", f, v);
        std::cout << buf;
      }
    }
    AttributionMap attr = diag.attribution;
    const auto features = featurize_all_causes(s, model, model.attribution ? &attr : nullptr);
    for (const auto& [cause, rs] : model.rules) {
      const auto firing = apply_rules(rs, features.at(cause));
      for (std::size_t k : firing.firing) std::cout << "  fires: " << rs.rules[k].condition() << " THEN cause " << cause << '\n';
    }
    for (const auto& ev : p.log) std::cout << "  " << ev.stage << ": cause " << ev.cause << " (" << ev.evidence << ")\n";
  }
  (void)common;
  return 0;
}

int run_ablate(const Common& common, const std::string& dataset_dir, const std::vector<std::string>& variant_names, const std::string& out) {
  const PipelineConfig cfg = pipeline_config(common);
  const Dataset d = load_dataset_dir(dataset_dir);
  std::vector<Variant> variants;
  for (const auto& v : variant_names) variants.push_back(variant_from_string(v));
  if (variants.empty()) variants = {Variant::kBase, Variant::kBaseFE, Variant::kBaseFEGraph, Variant::kFull};
  AblationResult r;
  {
    StageTimer t("ablate");
    r = run_ablation(d, variants, cfg);
  }
  if (r.split_fell_back) log(LogLevel::kWarn, "a label stratum had fewer than 2 samples; split fell back to unstratified");
  write_text(out, format_ablation(r, d.schema.causes));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NetRCA root-cause analysis pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--config", common.config, "Pipeline config JSON");

  std::string out;
  std::string dataset;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_config;
  std::optional<std::size_t> synth_samples;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--synth-config", synth_config, "Generator overrides JSON");
  synth->add_option("--samples", synth_samples, "Number of samples");

  auto* featurize_cmd = app.add_subcommand("featurize", "Write the feature table for one cause");
  CauseId cause = 1;
  std::string model_dir;
  featurize_cmd->add_option("--dataset", dataset, "Dataset directory")->required();
  featurize_cmd->add_option("--cause", cause, "Cause id")->required();
  featurize_cmd->add_option("--model", model_dir, "Model directory (adds attribution features)");
  featurize_cmd->add_option("--out", out, "Output CSV (default stdout)");

  auto* augment = app.add_subcommand("augment", "Augment labels by similarity transfer and timestamp union");
  std::string report;
  std::string dump_similarity;
  std::optional<double> tau;
  std::optional<std::size_t> max_transfers;
  std::optional<Timestamp> window;
  augment->add_option("--dataset", dataset, "Dataset directory")->required();
  augment->add_option("--out", out, "Augmented label file")->required();
  augment->add_option("--report", report, "Provenance report (default stdout)");
  augment->add_option("--dump-similarity", dump_similarity, "Write pairwise Eros similarities");
  augment->add_option("--tau", tau, "Similarity threshold");
  augment->add_option("--max-transfers", max_transfers, "Per-cause transfer cap");
  augment->add_option("--window", window, "Alignment window in seconds");

  auto* train_cmd = app.add_subcommand("train", "Train the pipeline");
  std::string labels;
  train_cmd->add_option("--dataset", dataset, "Dataset directory")->required();
  train_cmd->add_option("--labels", labels, "Label file overriding <dataset>/labels.tsv");
  train_cmd->add_option("--out", out, "Model directory")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict root causes");
  std::string dump_ranking;
  std::vector<std::string> stages;
  predict_cmd->add_option("--model", model_dir, "Model directory")->required();
  predict_cmd->add_option("--dataset", dataset, "Dataset directory")->required();
  predict_cmd->add_option("--out", out, "Prediction file (default stdout)");
  predict_cmd->add_option("--dump-ranking", dump_ranking, "Write per-sample graph ranking");
  predict_cmd->add_option("--stages", stages, "Override enabled stages (rules, attribution, graph, none)");

  auto* score = app.add_subcommand("score", "Score predictions against truth");
  std::string pred_path;
  std::string truth_path;
  score->add_option("--pred", pred_path, "Prediction file")->required();
  score->add_option("--truth", truth_path, "Truth label file")->required();
  score->add_option("--out", out, "key=value report file");

  auto* explain_cmd = app.add_subcommand("explain", "Print mined rules and per-sample evidence");
  std::vector<std::string> ids;
  explain_cmd->add_option("--model", model_dir, "Model directory")->required();
  explain_cmd->add_option("--dataset", dataset, "Dataset directory");
  explain_cmd->add_option("--sample", ids, "Sample ids to explain (default all)");

  auto* ablate = app.add_subcommand("ablate", "Run the ablation ladder");
  std::vector<std::string> variants;
  ablate->add_option("--dataset", dataset, "Dataset directory")->required();
  ablate->add_option("--variants", variants, "Variants: XGB, XGB+FE, XGB+FE+Graph, NetRCA");
  ablate->add_option("--out", out, "Output table (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return run_synth(common, out, synth_config, synth_samples);
    if (*featurize_cmd) return run_featurize(common, dataset, cause, model_dir, out);
    if (*augment) return run_augment(common, dataset, out, report, dump_similarity, tau, max_transfers, window);
    if (*train_cmd) return run_train(common, dataset, labels, out);
    if (*predict_cmd) return run_predict(common, model_dir, dataset, out, dump_ranking, stages);
    if (*score) return run_score(pred_path, truth_path, out);
    if (*explain_cmd) return run_explain(common, model_dir, dataset, ids);
    if (*ablate) return run_ablate(common, dataset, variants, out);
  } catch (const Error& e) {
    log(LogLevel::kError, e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    log(LogLevel::kError, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::kError, e.what());
    return 2;
  }
  return 1;
}
