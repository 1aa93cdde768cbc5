#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "netrca/core.hpp"
#include "netrca/features.hpp"

namespace netrca {

// Dense rows x named-columns view of a set of feature vectors. Column order is
// the lexicographic order of the feature names.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<std::string> row_ids;
  Matrix x;

  std::size_t num_rows() const { return x.rows; }
  std::size_t num_features() const { return names.size(); }

  std::span<const double> row(std::size_t r) const { return {x.data.data() + r * x.cols, x.cols}; }

  static FeatureTable from_vectors(std::span<const FeatureVector> vectors) {
    FeatureTable t;
    if (vectors.empty()) return t;
    for (const auto& [name, v] : vectors.front().entries) t.names.push_back(name);
    t.x = Matrix(vectors.size(), t.names.size());
    for (std::size_t r = 0; r < vectors.size(); ++r) {
      const auto& e = vectors[r].entries;
      if (e.size() != t.names.size()) {
        throw InvalidArgument("feature vector " + vectors[r].sample_id + " has a different key set");
      }
      std::size_t c = 0;
      for (const auto& [name, v] : e) {
        if (name != t.names[c]) throw InvalidArgument("feature vector " + vectors[r].sample_id + " has a different key set");
        t.x(r, c++) = v;
      }
      t.row_ids.push_back(vectors[r].sample_id);
    }
    return t;
  }

  static FeatureTable from_columns(std::vector<std::string> names, const Matrix& x) {
    if (names.size() != x.cols) throw InvalidArgument("FeatureTable: name count does not match columns");
    FeatureTable t;
    t.names = std::move(names);
    t.x = x;
    for (std::size_t r = 0; r < x.rows; ++r) t.row_ids.push_back(std::to_string(r));
    return t;
  }
};

}  // namespace netrca
