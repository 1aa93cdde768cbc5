#pragma once

// File formats:
//
//   dataset   CSV. Header `sample_id,timestamp,<feature id>...`, then one row
//             per (sample, timestamp); rows of one sample are contiguous and
//             `NA` marks a missing value.
//   labels    one line per sample: `<sample_id>\t<c1,c2,...>`; an empty cause
//             list means labeled fault-free, `UNLABELED` means unlabeled.
//   graph     `target <node>`, `nodes <node>...`, then one `parent child` per
//             line. Feature nodes are decimal ids, cause nodes are `R<id>`.
//   schema    JSON object mirroring FeatureSchema.
//
// Lines starting with '#' and blank lines are ignored in the text formats.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "netrca/core.hpp"

namespace netrca {

namespace io_detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline bool skip_line(const std::string& line) {
  auto t = trim(line);
  return t.empty() || t[0] == '#';
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  if (!parse_number(tok, v) || !std::isfinite(v)) throw DataError(where + ": bad number '" + tok + "'");
  return v;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace io_detail

// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline CauseSet parse_cause_list(const std::string& text, const std::string& where) {
  CauseSet out;
  auto t = io_detail::trim(text);
  if (t.empty()) return out;
  for (const auto& tok : io_detail::split(t, ',')) {
    CauseId c = 0;
    if (!io_detail::parse_number(io_detail::trim(tok), c)) throw DataError(where + ": bad cause id '" + tok + "'");
    out.insert(c);
  }
  return out;
}

// Label sidecar: sample id -> optional cause set (nullopt = UNLABELED).
// Also accepts prediction lines `id: c1,c2 [log]`.
inline std::map<std::string, std::optional<CauseSet>> read_label_file(const std::string& path) {
  auto in = io_detail::open_in(path);
  std::map<std::string, std::optional<CauseSet>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::skip_line(line)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string id;
    std::string rest;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      id = line.substr(0, tab);
      rest = line.substr(tab + 1);
    } else if (auto colon = line.find(": "); colon != std::string::npos) {
      id = line.substr(0, colon);
      rest = line.substr(colon + 2);
      if (auto br = rest.find(" ["); br != std::string::npos) rest = rest.substr(0, br);
    } else if (!line.empty() && line.back() == ':') {
      id = line.substr(0, line.size() - 1);
    } else {
      id = io_detail::trim(line);
    }
    id = io_detail::trim(id);
    if (id.empty()) throw DataError(where + ": malformed label record");
    if (out.count(id)) throw DataError(where + ": duplicate sample id " + id);
    rest = io_detail::trim(rest);
    if (rest == "UNLABELED") {
      out[id] = std::nullopt;
    } else {
      out[id] = parse_cause_list(rest, where);
    }
  }
  return out;
}

inline void write_label_file(const std::string& path, const std::vector<std::pair<std::string, std::optional<CauseSet>>>& labels) {
  auto out = io_detail::open_out(path);
  for (const auto& [id, label] : labels) {
    out << id << '\t' << (label ? format_causes(*label) : std::string("UNLABELED")) << '\n';
  }
}

inline std::vector<std::pair<std::string, std::optional<CauseSet>>> labels_of(const std::vector<Sample>& samples) {
  std::vector<std::pair<std::string, std::optional<CauseSet>>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.emplace_back(s.id, s.label);
  return out;
}

// Raw sample table without labels/schema/graph.
inline std::pair<std::vector<FeatureId>, std::vector<Sample>> read_sample_table(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<FeatureId> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::skip_line(line)) continue;
    auto cols = io_detail::split(line, ',');
    if (cols.size() < 3 || io_detail::trim(cols[0]) != "sample_id" || io_detail::trim(cols[1]) != "timestamp") {
      throw DataError(name + ":" + std::to_string(lineno) + ": malformed header, expected sample_id,timestamp,<features>");
    }
    for (std::size_t i = 2; i < cols.size(); ++i) {
      FeatureId f = 0;
      if (!io_detail::parse_number(io_detail::trim(cols[i]), f)) {
        throw DataError(name + ":" + std::to_string(lineno) + ": bad feature id '" + cols[i] + "'");
      }
      if (std::find(header.begin(), header.end(), f) != header.end()) {
        throw DataError(name + ":" + std::to_string(lineno) + ": duplicate feature id " + std::to_string(f));
      }
      header.push_back(f);
    }
    break;
  }
  if (header.empty()) throw DataError(name + ": missing header");

  const std::size_t n = header.size();
  std::vector<Sample> samples;
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::uint8_t>> masks;

  auto flush = [&] {
    if (samples.empty()) return;
    Sample& s = samples.back();
    s.values = Matrix(rows.size(), n);
    s.missing.assign(rows.size() * n, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        s.values(r, c) = rows[r][c];
        s.missing[r * n + c] = masks[r][c];
      }
    }
    rows.clear();
    masks.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::skip_line(line)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    auto cols = io_detail::split(line, ',');
    if (cols.size() != n + 2) {
      throw DataError(where + ": malformed record, expected " + std::to_string(n + 2) + " fields, got " + std::to_string(cols.size()));
    }
    const std::string id = io_detail::trim(cols[0]);
    if (id.empty()) throw DataError(where + ": malformed record, empty sample_id");
    Timestamp ts = 0;
    if (!io_detail::parse_number(io_detail::trim(cols[1]), ts)) throw DataError(where + ": malformed record, bad timestamp");

    if (samples.empty() || samples.back().id != id) {
      if (seen.count(id)) throw DataError(where + ": rows of sample " + id + " are not contiguous");
      flush();
      seen[id] = samples.size();
      Sample s;
      s.id = id;
      s.feature_ids = header;
      samples.push_back(std::move(s));
    }
    Sample& s = samples.back();
    if (!s.timestamps.empty() && ts <= s.timestamps.back()) {
      throw DataError("sample " + id + ": non-increasing timestamps (" + where + ")");
    }
    s.timestamps.push_back(ts);
    std::vector<double> row(n, 0.0);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t c = 0; c < n; ++c) {
      const std::string tok = io_detail::trim(cols[c + 2]);
      if (tok == "NA") {
        mask[c] = 1;
      } else {
        row[c] = io_detail::parse_double(tok, where);
      }
    }
    rows.push_back(std::move(row));
    masks.push_back(std::move(mask));
  }
  flush();
  return {header, samples};
}

inline void write_sample_table(std::ostream& out, const std::vector<FeatureId>& header, const std::vector<Sample>& samples) {
  out << "sample_id,timestamp";
  for (FeatureId f : header) out << ',' << f;
  out << '\n';
  for (const auto& s : samples) {
    for (std::size_t r = 0; r < s.num_rows(); ++r) {
      out << s.id << ',' << s.timestamps[r];
      for (std::size_t c = 0; c < s.num_features(); ++c) {
        out << ',' << (s.is_missing(r, c) ? std::string("NA") : format_double(s.values(r, c)));
      }
      out << '\n';
    }
  }
}

// ---- causal graph ----

inline CausalGraph parse_causal_graph(std::istream& in, const std::string& name) {
  CausalGraph g;
  std::optional<std::string> target;
  bool have_nodes = false;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::string, std::string>> raw_edges;
  std::vector<std::size_t> edge_lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::skip_line(line)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    auto tok = io_detail::split_ws(line);
    if (tok[0] == "target") {
      if (tok.size() != 2) throw DataError(where + ": expected 'target <node>'");
      if (target) throw DataError(where + ": duplicate target declaration");
      target = tok[1];
    } else if (tok[0] == "nodes") {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (g.index_of(tok[i])) throw DataError(where + ": duplicate node " + tok[i]);
        g.nodes.push_back(tok[i]);
      }
      have_nodes = true;
    } else if (tok.size() == 2) {
      raw_edges.emplace_back(tok[0], tok[1]);
      edge_lines.push_back(lineno);
    } else {
      throw DataError(where + ": malformed graph record");
    }
  }
  if (!target) throw DataError(name + ": missing target declaration");
  if (!have_nodes) throw DataError(name + ": missing nodes declaration");
  auto t = g.index_of(*target);
  if (!t) throw DataError(name + ": target " + *target + " is not a declared node");
  g.target = *t;
  for (std::size_t k = 0; k < raw_edges.size(); ++k) {
    const auto& [p, c] = raw_edges[k];
    const std::string where = name + ":" + std::to_string(edge_lines[k]);
    auto pi = g.index_of(p);
    auto ci = g.index_of(c);
    if (!pi) throw DataError(where + ": edge references undeclared node " + p);
    if (!ci) throw DataError(where + ": edge references undeclared node " + c);
    if (*pi == *ci) throw DataError(where + ": self-loop on node " + p);
    if (!g.has_edge(*pi, *ci)) g.edges.emplace_back(*pi, *ci);
  }
  return g;
}

inline CausalGraph load_causal_graph(const std::string& path) {
  auto in = io_detail::open_in(path);
  return parse_causal_graph(in, path);
}

inline void write_causal_graph(std::ostream& out, const CausalGraph& g) {
  out << "target " << g.nodes[g.target] << '\n';
  out << "nodes";
  for (const auto& n : g.nodes) out << ' ' << n;
  out << '\n';
  for (auto [p, c] : g.edges) out << g.nodes[p] << ' ' << g.nodes[c] << '\n';
}

// ---- schema ----

inline nlohmann::json schema_to_json(const FeatureSchema& s) {
  nlohmann::json j;
  j["target_feature"] = s.target_feature;
  j["causes"] = s.causes;
  nlohmann::json adj = nlohmann::json::object();
  for (const auto& [c, fs] : s.adjacent) adj[std::to_string(c)] = fs;
  j["adjacent"] = adj;
  j["location_feature"] = s.location_feature ? nlohmann::json(*s.location_feature) : nlohmann::json(nullptr);
  j["grid"] = {{"rows", s.grid.rows}, {"cols", s.grid.cols}, {"order", s.grid.row_major ? "row_major" : "col_major"}};
  nlohmann::json xy = nlohmann::json::array();
  for (auto [x, y] : s.xy_pairs) xy.push_back({x, y});
  j["xy_pairs"] = xy;
  nlohmann::json cf = nlohmann::json::object();
  for (const auto& [c, fs] : s.cause_features) {
    cf[std::to_string(c)] = {{"raw", fs.raw}, {"interaction", fs.interaction}, {"attribution", fs.attribution}};
  }
  j["cause_features"] = cf;
  return j;
}

inline FeatureSchema schema_from_json(const nlohmann::json& j) {
  try {
    FeatureSchema s;
    s.target_feature = j.at("target_feature").get<FeatureId>();
    s.causes = j.at("causes").get<std::vector<CauseId>>();
    for (const auto& [k, v] : j.at("adjacent").items()) s.adjacent[std::stoi(k)] = v.get<std::vector<FeatureId>>();
    if (j.contains("location_feature") && !j["location_feature"].is_null()) s.location_feature = j["location_feature"].get<FeatureId>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      s.grid.rows = g.value("rows", 4);
      s.grid.cols = g.value("cols", 8);
      const auto order = g.value("order", std::string("row_major"));
      if (order != "row_major" && order != "col_major") throw DataError("schema grid order must be row_major or col_major");
      s.grid.row_major = order == "row_major";
    }
    if (j.contains("xy_pairs")) {
      for (const auto& p : j["xy_pairs"]) s.xy_pairs.emplace_back(p.at(0).get<FeatureId>(), p.at(1).get<FeatureId>());
    }
    for (const auto& [k, v] : j.at("cause_features").items()) {
      CauseFeatureSet fs;
      fs.raw = v.at("raw").get<std::vector<FeatureId>>();
      fs.interaction = v.value("interaction", false);
      fs.attribution = v.value("attribution", false);
      s.cause_features[std::stoi(k)] = fs;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema: ") + e.what());
  }
}

inline FeatureSchema load_schema(const std::string& path) {
  auto in = io_detail::open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return schema_from_json(j);
}

inline void write_schema(const std::string& path, const FeatureSchema& s) {
  auto out = io_detail::open_out(path);
  out << schema_to_json(s).dump(2) << '\n';
}

// ---- dataset ----

struct DatasetFiles {
  std::string data;
  std::string schema;
  std::string labels;  // empty: every sample unlabeled
  std::string graph;   // empty: no graph
};

// Checks the Sample/Dataset invariants against the schema.
inline void validate_dataset(const Dataset& d) {
  d.schema.validate(d.feature_ids);
  for (const auto& s : d.samples) {
    if (s.num_rows() == 0) throw DataError("sample " + s.id + ": no rows");
    if (s.feature_ids != d.feature_ids) throw DataError("sample " + s.id + ": feature columns differ from header");
    for (std::size_t r = 1; r < s.num_rows(); ++r) {
      if (s.timestamps[r] <= s.timestamps[r - 1]) throw DataError("sample " + s.id + ": non-increasing timestamps");
    }
    if (s.label) {
      for (CauseId c : *s.label) {
        if (!d.schema.declares(c)) throw DataError("sample " + s.id + ": unknown cause " + std::to_string(c));
      }
    }
    if (d.schema.location_feature) {
      const std::size_t col = *s.column_of(*d.schema.location_feature);
      for (std::size_t r = 0; r < s.num_rows(); ++r) {
        if (s.is_missing(r, col)) continue;
        const double v = s.values(r, col);
        if (v < 0 || v >= d.schema.grid.cells()) {
          throw DataError("sample " + s.id + ": location index " + format_double(v) + " outside grid");
        }
      }
    }
  }
}

inline Dataset load_dataset(const DatasetFiles& files) {
  Dataset d;
  d.schema = load_schema(files.schema);
  {
    auto in = io_detail::open_in(files.data);
    auto [header, samples] = read_sample_table(in, files.data);
    d.feature_ids = std::move(header);
    d.samples = std::move(samples);
  }
  if (!files.labels.empty()) {
    auto labels = read_label_file(files.labels);
    for (auto& s : d.samples) {
      auto it = labels.find(s.id);
      if (it != labels.end()) s.label = it->second;
    }
    for (const auto& [id, label] : labels) {
      if (!label) continue;
      for (CauseId c : *label) {
        if (!d.schema.declares(c)) throw DataError(files.labels + ": sample " + id + ": unknown cause " + std::to_string(c));
      }
    }
  }
  if (!files.graph.empty()) d.graph = load_causal_graph(files.graph);
  validate_dataset(d);
  return d;
}

inline Dataset load_dataset(const std::string& data_path, const std::string& schema_path) {
  return load_dataset(DatasetFiles{data_path, schema_path, {}, {}});
}

// Writes the sample table (and the label sidecar when a path is given).
inline void write_dataset(const Dataset& d, const std::string& data_path, const std::string& labels_path = {}) {
  {
    auto out = io_detail::open_out(data_path);
    write_sample_table(out, d.feature_ids, d.samples);
  }
  if (!labels_path.empty()) write_label_file(labels_path, labels_of(d.samples));
}

}  // namespace netrca
