#include "gale/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gale/error.hpp"

namespace gale {

AttributionMatrix::AttributionMatrix(std::vector<std::string> class_names,
                                     std::vector<std::string> vocabulary)
    : class_names_(std::move(class_names)), vocabulary_(std::move(vocabulary)) {
  column_index_.reserve(vocabulary_.size());
  for (std::size_t j = 0; j < vocabulary_.size(); ++j) {
    if (!column_index_.emplace(vocabulary_[j], static_cast<int>(j)).second) {
      fail("internal", "AttributionMatrix: duplicate vocabulary token '" + vocabulary_[j] + "'");
    }
  }
}

void AttributionMatrix::append_row(Row row) {
  if (row.predicted_class < 0 || row.predicted_class >= static_cast<int>(class_names_.size())) {
    fail("internal", "AttributionMatrix: predicted class " + std::to_string(row.predicted_class) +
                         " outside " + std::to_string(class_names_.size()) + " classes");
  }
  if (!std::isfinite(row.intercept) || !std::isfinite(row.surrogate_r2)) {
    fail("internal", "AttributionMatrix: non-finite intercept or r2");
  }
  for (const auto& [j, v] : row.entries) {
    if (j < 0 || j >= static_cast<int>(vocabulary_.size())) {
      fail("internal", "AttributionMatrix: column " + std::to_string(j) + " out of range");
    }
    if (!std::isfinite(v)) fail("internal", "AttributionMatrix: non-finite attribution");
  }
  if (!std::is_sorted(row.entries.begin(), row.entries.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; })) {
    std::sort(row.entries.begin(), row.entries.end());
  }
  for (const auto& existing : rows_) {
    if (existing.doc_id == row.doc_id) {
      fail("internal", "AttributionMatrix: duplicate doc_id " + std::to_string(row.doc_id));
    }
  }
  rows_.push_back(std::move(row));
}

AttributionMatrix AttributionMatrix::from_explanations(
    std::vector<std::string> class_names, std::vector<std::string> vocabulary,
    const std::vector<Explanation>& explanations) {
  if (vocabulary.empty()) {
    std::set<std::string> tokens;
    for (const auto& e : explanations) {
      for (const auto& [token, weight] : e.attributions) tokens.insert(token);
    }
    vocabulary.assign(tokens.begin(), tokens.end());
  }
  AttributionMatrix matrix(std::move(class_names), std::move(vocabulary));
  for (const auto& e : explanations) {
    Row row;
    row.doc_id = e.doc_id;
    row.predicted_class = e.predicted_class;
    row.intercept = e.intercept;
    row.surrogate_r2 = e.surrogate_r2;
    row.entries.reserve(e.attributions.size());
    for (const auto& [token, weight] : e.attributions) {
      const int j = matrix.column_of(token);
      if (j < 0) {
        fail("internal", "AttributionMatrix: token '" + token + "' missing from vocabulary");
      }
      row.entries.emplace_back(j, weight);
    }
    matrix.append_row(std::move(row));
  }
  return matrix;
}

int AttributionMatrix::column_of(const std::string& token) const {
  const auto it = column_index_.find(token);
  return it == column_index_.end() ? -1 : it->second;
}

}  // namespace gale
