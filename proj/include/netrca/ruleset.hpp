#pragma once

// Conjunctive rule mining from bagged decision-tree paths, filtered by
// precision/recall and de-duplicated by coverage overlap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "netrca/core.hpp"
#include "netrca/features.hpp"
#include "netrca/io.hpp"
#include "netrca/random.hpp"
#include "netrca/table.hpp"

namespace netrca {

enum class Comparator { kLessEqual, kGreater };

struct Clause {
  std::string feature;
  Comparator op = Comparator::kLessEqual;
  double threshold = 0.0;

  bool holds(double v) const { return op == Comparator::kLessEqual ? v <= threshold : v > threshold; }
  std::string to_string() const {
    return feature + (op == Comparator::kLessEqual ? " <= " : " > ") + format_double(threshold);
  }
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Rule {
  std::vector<Clause> clauses;
  CauseId cause = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t coverage = 0;  // samples covered in the mining table

  std::string condition() const {
    std::string s;
    for (const auto& c : clauses) {
      if (!s.empty()) s += " AND ";
      s += c.to_string();
    }
    return s;
  }
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
  CauseId cause = 0;
  std::vector<Rule> rules;
  double precision_min = 0.9;
  double recall_min = 0.05;
  double jaccard_max = 0.8;
  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

struct RuleParams {
  int n_estimators = 10;
  int max_depth = 3;
  double precision_min = 0.9;
  double recall_min = 0.05;
  double jaccard_max = 0.8;
  double feature_subsample = 0.7;
  std::uint64_t seed = 0;
};

// Tightest bound per (feature, comparator), clauses in canonical order.
inline std::vector<Clause> simplify_clauses(const std::vector<Clause>& clauses) {
  std::map<std::pair<std::string, Comparator>, double> bound;
  for (const auto& c : clauses) {
    auto key = std::pair{c.feature, c.op};
    auto it = bound.find(key);
    if (it == bound.end()) {
      bound[key] = c.threshold;
    } else if (c.op == Comparator::kLessEqual) {
      it->second = std::min(it->second, c.threshold);
    } else {
      it->second = std::max(it->second, c.threshold);
    }
  }
  std::vector<Clause> out;
  for (const auto& [key, t] : bound) out.push_back({key.first, key.second, t});
  return out;
}

inline bool rule_covers(const std::vector<Clause>& clauses, const std::vector<std::size_t>& columns, std::span<const double> row) {
  for (std::size_t k = 0; k < clauses.size(); ++k) {
    if (!clauses[k].holds(row[columns[k]])) return false;
  }
  return true;
}

namespace rules_detail {

struct CartNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t positives = 0;
  std::size_t total = 0;
  int parent = -1;
  bool is_left = false;
};

inline double gini(double pos, double total) {
  if (total <= 0) return 0.0;
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

// Depth-bounded classification tree (Gini impurity, midpoint thresholds) on
// the given row multiset. Ties resolve to the lexicographically first
// feature, then the lower threshold.
inline std::vector<CartNode> fit_cart(const FeatureTable& t, std::span<const std::uint8_t> y, const std::vector<std::size_t>& rows,
                                      const std::vector<std::size_t>& features, int max_depth) {
  std::vector<CartNode> nodes;
  struct Work {
    int node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Work> stack;
  nodes.push_back({});
  stack.push_back({0, rows, 0});
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    auto& node = nodes[w.node];
    node.total = w.rows.size();
    node.positives = 0;
    for (auto r : w.rows) node.positives += y[r];
    if (w.depth >= max_depth || node.positives == 0 || node.positives == node.total) continue;

    const double parent_impurity = gini(static_cast<double>(node.positives), static_cast<double>(node.total)) * static_cast<double>(node.total);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = w.rows;
    for (std::size_t f : features) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t.x(a, f) < t.x(b, f); });
      double lp = 0;
      double lt = 0;
      const double tp = static_cast<double>(node.positives);
      const double tt = static_cast<double>(node.total);
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        lp += y[order[k]];
        lt += 1;
        const double v = t.x(order[k], f);
        const double next = t.x(order[k + 1], f);
        if (!(next > v)) continue;
        const double impurity = gini(lp, lt) * lt + gini(tp - lp, tt - lt) * (tt - lt);
        const double gain = parent_impurity - impurity;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = v + (next - v) / 2.0;
        }
      }
    }
    if (best_feature < 0) continue;
    std::vector<std::size_t> lrows;
    std::vector<std::size_t> rrows;
    for (auto r : w.rows) (t.x(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
    const int l = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes.push_back({});
    nodes[w.node].feature = best_feature;
    nodes[w.node].threshold = best_threshold;
    nodes[w.node].left = l;
    nodes[w.node].right = l + 1;
    nodes[l].parent = w.node;
    nodes[l].is_left = true;
    nodes[l + 1].parent = w.node;
    nodes[l + 1].is_left = false;
    stack.push_back({l + 1, std::move(rrows), w.depth + 1});
    stack.push_back({l, std::move(lrows), w.depth + 1});
  }
  return nodes;
}

inline double jaccard(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace rules_detail

struct RuleMetrics {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t coverage = 0;
  std::vector<std::uint8_t> covered;
};

inline std::vector<std::size_t> clause_columns(const FeatureTable& t, const std::vector<Clause>& clauses) {
  std::vector<std::size_t> cols;
  for (const auto& c : clauses) {
    auto it = std::find(t.names.begin(), t.names.end(), c.feature);
    if (it == t.names.end()) throw InvalidArgument("rule references unknown feature " + c.feature);
    cols.push_back(static_cast<std::size_t>(it - t.names.begin()));
  }
  return cols;
}

inline RuleMetrics measure_rule(const FeatureTable& t, std::span<const std::uint8_t> y, const std::vector<Clause>& clauses) {
  const auto cols = clause_columns(t, clauses);
  RuleMetrics m;
  m.covered.assign(t.num_rows(), 0);
  std::size_t tp = 0;
  std::size_t pos = 0;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    pos += y[r];
    if (rule_covers(clauses, cols, t.row(r))) {
      m.covered[r] = 1;
      ++m.coverage;
      tp += y[r];
    }
  }
  m.precision = m.coverage ? static_cast<double>(tp) / static_cast<double>(m.coverage) : 0.0;
  m.recall = pos ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
  return m;
}

inline RuleSet mine_rules(const FeatureTable& table, std::span<const std::uint8_t> labels, CauseId cause, const RuleParams& params) {
  const std::size_t n = table.num_rows();
  const std::size_t p = table.num_features();
  if (labels.size() != n) throw InvalidArgument("mine_rules: label count does not match rows");
  std::size_t pos = 0;
  for (auto y : labels) pos += y != 0;
  if (pos == 0 || pos == n) throw InvalidArgument("mine_rules: both classes must be present");
  if (params.n_estimators < 1 || params.max_depth < 1) throw InvalidArgument("mine_rules: n_estimators and max_depth must be >= 1");

  RuleSet rs;
  rs.cause = cause;
  rs.precision_min = params.precision_min;
  rs.recall_min = params.recall_min;
  rs.jaccard_max = params.jaccard_max;

  std::vector<std::size_t> by_name(p);
  std::iota(by_name.begin(), by_name.end(), 0);
  std::stable_sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) { return table.names[a] < table.names[b]; });

  // Candidate generation.
  std::vector<std::vector<Clause>> candidates;
  for (int e = 0; e < params.n_estimators; ++e) {
    Rng rng = Rng::stream(params.seed, static_cast<std::uint64_t>(e));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.below(n);
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
    const auto nodes = rules_detail::fit_cart(table, labels, rows, features, params.max_depth);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      // Only paths whose terminal node predicts the cause.
      if (2 * nodes[i].positives <= nodes[i].total) continue;
      std::vector<Clause> path;
      for (int k = static_cast<int>(i); nodes[k].parent >= 0; k = nodes[k].parent) {
        const auto& parent = nodes[nodes[k].parent];
        path.push_back({table.names[parent.feature], nodes[k].is_left ? Comparator::kLessEqual : Comparator::kGreater, parent.threshold});
      }
      candidates.push_back(simplify_clauses(path));
    }
  }

  // Precision/recall filter on the full table.
  struct Scored {
    Rule rule;
    std::vector<std::uint8_t> covered;
    std::string key;
  };
  std::vector<Scored> kept;
  std::map<std::string, bool> seen;
  for (auto& clauses : candidates) {
    Rule r;
    r.clauses = clauses;
    r.cause = cause;
    const std::string key = r.condition();
    if (seen.count(key)) continue;
    seen[key] = true;
    auto m = measure_rule(table, labels, clauses);
    if (m.precision < params.precision_min || m.recall < params.recall_min) continue;
    r.precision = m.precision;
    r.recall = m.recall;
    r.coverage = m.coverage;
    kept.push_back({std::move(r), std::move(m.covered), key});
  }
  std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
    return std::tie(b.rule.precision, b.rule.recall, a.key) < std::tie(a.rule.precision, a.rule.recall, b.key);
  });

  // Similarity filtering.
  std::vector<const Scored*> accepted;
  for (const auto& s : kept) {
    bool diverse = true;
    for (const auto* a : accepted) {
      if (rules_detail::jaccard(s.covered, a->covered) > params.jaccard_max) {
        diverse = false;
        break;
      }
    }
    if (diverse) accepted.push_back(&s);
  }
  for (const auto* a : accepted) rs.rules.push_back(a->rule);
  return rs;
}

struct RuleFiring {
  bool fired = false;
  std::vector<std::size_t> firing;  // indices into RuleSet::rules
};

inline bool rule_holds(const Rule& rule, const FeatureVector& x) {
  for (const auto& c : rule.clauses) {
    auto it = x.entries.find(c.feature);
    if (it == x.entries.end()) throw InvalidArgument("apply_rules: feature vector " + x.sample_id + " lacks " + c.feature);
    if (!c.holds(it->second)) return false;
  }
  return true;
}

inline RuleFiring apply_rules(const RuleSet& rs, const FeatureVector& x) {
  RuleFiring out;
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    if (rule_holds(rs.rules[i], x)) out.firing.push_back(i);
  }
  out.fired = !out.firing.empty();
  return out;
}

// ---- serialization: one rule per line ----

inline std::string serialize(const RuleSet& rs) {
  std::ostringstream out;
  out << "# netrca-rules v1 cause=" << rs.cause << " precision_min=" << format_double(rs.precision_min)
      << " recall_min=" << format_double(rs.recall_min) << " jaccard_max=" << format_double(rs.jaccard_max) << '\n';
  for (const auto& r : rs.rules) {
    out << "cause " << r.cause << ": " << r.condition() << " [p=" << format_double(r.precision) << ", r=" << format_double(r.recall)
        << ", n=" << r.coverage << "]\n";
  }
  return out.str();
}

inline RuleSet deserialize_ruleset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  RuleSet rs;
  bool have_header = false;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) { throw DataError("ruleset line " + std::to_string(lineno) + ": " + why); };
  auto number = [&](const std::string& tok) {
    double v = 0;
    if (!io_detail::parse_number(tok, v)) fail("bad number '" + tok + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::trim(line).empty()) continue;
    if (line.rfind("# netrca-rules v1", 0) == 0) {
      for (const auto& tok : io_detail::split_ws(line.substr(17))) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) fail("bad header field");
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "cause") {
          rs.cause = static_cast<CauseId>(number(val));
        } else if (key == "precision_min") {
          rs.precision_min = number(val);
        } else if (key == "recall_min") {
          rs.recall_min = number(val);
        } else if (key == "jaccard_max") {
          rs.jaccard_max = number(val);
        }
      }
      have_header = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (line.rfind("cause ", 0) != 0) fail("expected 'cause <id>: ...'");
    const auto colon = line.find(": ");
    const auto bracket = line.rfind(" [");
    if (colon == std::string::npos || bracket == std::string::npos || line.back() != ']') fail("malformed rule");
    Rule r;
    r.cause = static_cast<CauseId>(number(line.substr(6, colon - 6)));
    const std::string cond = line.substr(colon + 2, bracket - colon - 2);
    std::size_t start = 0;
    while (start <= cond.size()) {
      auto next = cond.find(" AND ", start);
      const std::string clause = cond.substr(start, next == std::string::npos ? std::string::npos : next - start);
      auto tok = io_detail::split_ws(clause);
      if (tok.size() != 3 || (tok[1] != "<=" && tok[1] != ">")) fail("malformed clause '" + clause + "'");
      r.clauses.push_back({tok[0], tok[1] == "<=" ? Comparator::kLessEqual : Comparator::kGreater, number(tok[2])});
      if (next == std::string::npos) break;
      start = next + 5;
    }
    const std::string metrics = line.substr(bracket + 2, line.size() - bracket - 3);
    for (auto field : io_detail::split(metrics, ',')) {
      field = io_detail::trim(field);
      auto eq = field.find('=');
      if (eq == std::string::npos) fail("bad metric '" + field + "'");
      const auto key = field.substr(0, eq);
      const auto val = field.substr(eq + 1);
      if (key == "p") {
        r.precision = number(val);
      } else if (key == "r") {
        r.recall = number(val);
      } else if (key == "n") {
        r.coverage = static_cast<std::size_t>(number(val));
      }
    }
    rs.rules.push_back(std::move(r));
  }
  if (!have_header) throw DataError("ruleset: missing header");
  return rs;
}

// Human-readable listing, one line per rule.
inline std::string explain(const RuleSet& rs) {
  std::ostringstream out;
  out << "cause " << rs.cause << ": " << rs.rules.size() << " rules (precision_min=" << format_double(rs.precision_min)
      << ", recall_min=" << format_double(rs.recall_min) << ", jaccard_max=" << format_double(rs.jaccard_max) << ")\n";
  char buf[96];
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const auto& r = rs.rules[i];
    std::snprintf(buf, sizeof buf, "precision=%.4f recall=%.4f covered=%zu", r.precision, r.recall, r.coverage);
    out << "  [" << i + 1 << "] IF " << r.condition() << " THEN cause " << r.cause << "  " << buf << '\n';
  }
  return out.str();
}

}  // namespace netrca
