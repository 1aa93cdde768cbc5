#pragma once

// Label augmentation: Eros-similarity transfer from labeled to unlabeled
// samples, and label union across labeled samples whose time spans share an
// alignment window.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"
#include "netrca/eros.hpp"
#include "netrca/parallel.hpp"

namespace netrca {

struct AugmentConfig {
  double similarity_threshold = 0.9;
  std::size_t max_transfers_per_cause = std::numeric_limits<std::size_t>::max();
  Timestamp alignment_window = 60;  // seconds

  void validate() const {
    if (!(similarity_threshold > 0.0)) throw InvalidArgument("similarity_threshold must be > 0");
    if (alignment_window <= 0) throw InvalidArgument("alignment_window must be > 0");
  }
};

struct TransferProvenance {
  CauseId cause = 0;
  std::string source_id;
  double similarity = 0.0;
};

struct TransferRecord {
  std::string sample_id;
  CauseSet causes;
  std::vector<TransferProvenance> provenance;
};

struct TransferResult {
  std::vector<TransferRecord> records;  // sorted by sample_id
  std::vector<std::string> warnings;

  std::size_t transfer_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.provenance.size();
    return n;
  }
};

struct LabeledDecomposition {
  const ErosDecomposition* decomposition;
  CauseSet label;
};

// Per cause: each unlabeled decomposition is matched to its most similar
// exemplar labeled with that cause; matches at or above the threshold are
// kept in descending similarity (ties by sample id), at most
// max_transfers_per_cause of them.
inline TransferResult similarity_transfer(std::span<const LabeledDecomposition> labeled,
                                          std::span<const ErosDecomposition> unlabeled, const ErosWeights& w,
                                          std::span<const CauseId> causes, const AugmentConfig& cfg,
                                          unsigned threads = 1) {
  cfg.validate();
  TransferResult result;
  const std::size_t nl = labeled.size();
  const std::size_t nu = unlabeled.size();

  std::vector<double> sim(nu * nl, 0.0);
  parallel_for(nu, threads, [&](std::size_t u) {
    for (std::size_t l = 0; l < nl; ++l) sim[u * nl + l] = eros(unlabeled[u], *labeled[l].decomposition, w);
  });

  std::map<std::string, TransferRecord> by_id;
  for (CauseId cause : causes) {
    std::vector<std::size_t> exemplars;
    for (std::size_t l = 0; l < nl; ++l) {
      if (labeled[l].label.count(cause)) exemplars.push_back(l);
    }
    if (exemplars.empty()) {
      result.warnings.push_back("cause " + std::to_string(cause) + ": no labeled exemplars, transfer pass skipped");
      continue;
    }
    struct Candidate {
      std::size_t u;
      std::size_t source;
      double similarity;
    };
    std::vector<Candidate> candidates;
    for (std::size_t u = 0; u < nu; ++u) {
      std::size_t best = exemplars.front();
      for (std::size_t l : exemplars) {
        const double s = sim[u * nl + l];
        const double b = sim[u * nl + best];
        if (s > b || (s == b && labeled[l].decomposition->sample_id < labeled[best].decomposition->sample_id)) best = l;
      }
      const double s = sim[u * nl + best];
      if (s >= cfg.similarity_threshold) candidates.push_back({u, best, s});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return unlabeled[a.u].sample_id < unlabeled[b.u].sample_id;
    });
    if (candidates.size() > cfg.max_transfers_per_cause) candidates.resize(cfg.max_transfers_per_cause);
    for (const auto& c : candidates) {
      auto& rec = by_id[unlabeled[c.u].sample_id];
      rec.sample_id = unlabeled[c.u].sample_id;
      rec.causes.insert(cause);
      rec.provenance.push_back({cause, labeled[c.source].decomposition->sample_id, c.similarity});
    }
  }
  for (auto& [id, rec] : by_id) result.records.push_back(std::move(rec));
  return result;
}

// Convenience overload over samples (decomposes internally).
inline TransferResult similarity_transfer(std::span<const Sample> labeled, std::span<const Sample> unlabeled,
                                          const ErosWeights& w, std::span<const CauseId> causes,
                                          const AugmentConfig& cfg, unsigned threads = 1) {
  std::vector<ErosDecomposition> ld(labeled.size());
  std::vector<ErosDecomposition> ud(unlabeled.size());
  parallel_for(labeled.size(), threads, [&](std::size_t i) { ld[i] = decompose(labeled[i]); });
  parallel_for(unlabeled.size(), threads, [&](std::size_t i) { ud[i] = decompose(unlabeled[i]); });
  std::vector<LabeledDecomposition> lab;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (!labeled[i].label) throw InvalidArgument("similarity_transfer: exemplar " + labeled[i].id + " is unlabeled");
    lab.push_back({&ld[i], *labeled[i].label});
  }
  return similarity_transfer(lab, ud, w, causes, cfg, threads);
}

// Applies transfer records to unlabeled samples; returns the ids that gained
// a label. Labeled samples are never touched.
inline std::vector<std::string> apply_transfers(std::vector<Sample>& samples, const TransferResult& result) {
  std::map<std::string, const TransferRecord*> by_id;
  for (const auto& r : result.records) by_id[r.sample_id] = &r;
  std::vector<std::string> changed;
  for (auto& s : samples) {
    if (s.label) continue;
    auto it = by_id.find(s.id);
    if (it == by_id.end()) continue;
    s.label = it->second->causes;
    changed.push_back(s.id);
  }
  return changed;
}

struct UnionEvent {
  std::string sample_id;
  CauseSet before;
  CauseSet after;
  bool negative_to_positive = false;  // a labeled fault-free sample acquired causes
};

inline Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Labeled samples whose bucketed time spans intersect (transitively) share
// the union of their label sets. Unlabeled samples neither give nor receive.
inline std::vector<UnionEvent> timestamp_union(std::vector<Sample>& samples, Timestamp window) {
  if (window <= 0) throw InvalidArgument("timestamp_union: window must be > 0");
  struct Span {
    Timestamp first;
    Timestamp last;
    std::size_t index;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.label || s.timestamps.empty()) continue;
    spans.push_back({floor_div(s.timestamps.front(), window), floor_div(s.timestamps.back(), window), i});
  }
  std::sort(spans.begin(), spans.end(), [&](const Span& a, const Span& b) {
    if (a.first != b.first) return a.first < b.first;
    return samples[a.index].id < samples[b.index].id;
  });

  std::vector<UnionEvent> events;
  std::size_t start = 0;
  while (start < spans.size()) {
    std::size_t end = start + 1;
    Timestamp reach = spans[start].last;
    while (end < spans.size() && spans[end].first <= reach) {
      reach = std::max(reach, spans[end].last);
      ++end;
    }
    CauseSet merged;
    for (std::size_t k = start; k < end; ++k) merged.insert(samples[spans[k].index].label->begin(), samples[spans[k].index].label->end());
    for (std::size_t k = start; k < end; ++k) {
      Sample& s = samples[spans[k].index];
      if (*s.label != merged) {
        events.push_back({s.id, *s.label, merged, s.label->empty()});
        s.label = merged;
      }
    }
    start = end;
  }
  std::sort(events.begin(), events.end(), [](const UnionEvent& a, const UnionEvent& b) { return a.sample_id < b.sample_id; });
  return events;
}

}  // namespace netrca
