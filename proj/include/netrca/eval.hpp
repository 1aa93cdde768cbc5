#pragma once

// Challenge scoring (+1 per true-positive cause, -1 per false-positive cause,
// normalized by sample count) and stratified train/validation splitting.

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "netrca/core.hpp"
#include "netrca/io.hpp"
#include "netrca/random.hpp"

namespace netrca {

using CauseSets = std::map<std::string, CauseSet>;

struct CauseCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double accuracy = 0.0;
};

struct ScoreReport {
  double final_score = 0.0;
  double attainable_max = 0.0;  // score of a perfect prediction on this truth
  std::map<CauseId, CauseCounts> per_cause;
  std::size_t n_samples = 0;
  std::size_t total_tp = 0;
  std::size_t total_fp = 0;
};

inline ScoreReport challenge_score(const CauseSets& preds, const CauseSets& truth) {
  if (preds.size() != truth.size()) throw InvalidArgument("challenge_score: prediction and truth key sets differ");
  for (const auto& [id, t] : truth) {
    if (!preds.count(id)) throw InvalidArgument("challenge_score: no prediction for sample " + id);
  }
  ScoreReport r;
  r.n_samples = truth.size();
  if (r.n_samples == 0) return r;
  CauseSet causes;
  for (const auto& [id, t] : truth) causes.insert(t.begin(), t.end());
  for (const auto& [id, p] : preds) causes.insert(p.begin(), p.end());
  for (CauseId c : causes) r.per_cause[c];

  std::size_t attainable = 0;
  std::map<CauseId, std::size_t> agree;
  for (const auto& [id, t] : truth) {
    const auto& p = preds.at(id);
    attainable += t.size();
    for (CauseId c : p) {
      if (t.count(c)) {
        ++r.total_tp;
        ++r.per_cause[c].tp;
      } else {
        ++r.total_fp;
        ++r.per_cause[c].fp;
      }
    }
    for (CauseId c : t) {
      if (!p.count(c)) ++r.per_cause[c].fn;
    }
    for (CauseId c : causes) agree[c] += (p.count(c) > 0) == (t.count(c) > 0);
  }
  const double n = static_cast<double>(r.n_samples);
  r.final_score = (static_cast<double>(r.total_tp) - static_cast<double>(r.total_fp)) / n;
  r.attainable_max = static_cast<double>(attainable) / n;
  for (auto& [c, counts] : r.per_cause) counts.accuracy = static_cast<double>(agree[c]) / n;
  return r;
}

inline std::string format_report(const ScoreReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %.4f\n%-16s %.4f\n%-16s %zu\n", "final_score", r.final_score, "attainable_max", r.attainable_max,
                "n_samples", r.n_samples);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-8s %8s %6s %6s %6s\n", "cause", "accuracy", "tp", "fp", "fn");
  out << buf;
  for (const auto& [c, k] : r.per_cause) {
    std::snprintf(buf, sizeof buf, "%-8d %8.4f %6zu %6zu %6zu\n", c, k.accuracy, k.tp, k.fp, k.fn);
    out << buf;
  }
  return out.str();
}

// key=value lines with exact (round-trip) numbers.
inline std::string format_report_kv(const ScoreReport& r) {
  std::ostringstream out;
  out << "final_score=" << format_double(r.final_score) << '\n';
  out << "attainable_max=" << format_double(r.attainable_max) << '\n';
  out << "n_samples=" << r.n_samples << '\n';
  out << "tp=" << r.total_tp << '\n';
  out << "fp=" << r.total_fp << '\n';
  for (const auto& [c, k] : r.per_cause) {
    out << "cause" << c << ".accuracy=" << format_double(k.accuracy) << '\n';
    out << "cause" << c << ".tp=" << k.tp << '\n';
    out << "cause" << c << ".fp=" << k.fp << '\n';
    out << "cause" << c << ".fn=" << k.fn << '\n';
  }
  return out.str();
}

struct SplitEntry {
  std::string id;
  CauseSet label;
  bool augmented = false;  // label came from augmentation; always trains
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  bool fell_back = false;  // a stratum had fewer than 2 members
};

// Stratified by exact label set. Train size is round(fraction * #original)
// allocated across strata by largest remainder; augmented entries join train.
inline Split stratified_split(const std::vector<SplitEntry>& entries, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("stratified_split: fraction must be in [0, 1]");
  Split out;
  std::map<std::string, std::vector<std::string>> strata;
  std::size_t original = 0;
  for (const auto& e : entries) {
    if (e.augmented) {
      out.train.push_back(e.id);
      continue;
    }
    strata[format_causes(e.label)].push_back(e.id);
    ++original;
  }
  for (const auto& [key, ids] : strata) {
    if (ids.size() < 2) out.fell_back = true;
  }
  if (out.fell_back) {
    std::vector<std::string> all;
    for (auto& [key, ids] : strata) all.insert(all.end(), ids.begin(), ids.end());
    strata.clear();
    strata[""] = std::move(all);
  }

  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(original)));
  struct Alloc {
    std::string key;
    std::size_t take;
    double remainder;
  };
  std::vector<Alloc> alloc;
  std::size_t assigned = 0;
  for (const auto& [key, ids] : strata) {
    const double exact = fraction * static_cast<double>(ids.size());
    const auto take = static_cast<std::size_t>(std::floor(exact));
    alloc.push_back({key, take, exact - static_cast<double>(take)});
    assigned += take;
  }
  std::vector<std::size_t> order(alloc.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alloc[a].remainder > alloc[b].remainder; });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    auto& a = alloc[order[k]];
    if (a.take < strata[a.key].size()) {
      ++a.take;
      ++assigned;
    }
  }

  std::uint64_t stream = 0;
  for (auto& a : alloc) {
    auto ids = strata[a.key];
    std::sort(ids.begin(), ids.end());
    Rng rng = Rng::stream(seed, stream++);
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) (i < a.take ? out.train : out.validation).push_back(ids[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

}  // namespace netrca
