#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gale {

// One instance's local surrogate: intercept plus a sparse token -> weight map.
struct Explanation {
  int doc_id = -1;
  int predicted_class = -1;
  double intercept = 0.0;
  double surrogate_r2 = 0.0;
  double local_fidelity = 0.0;  // |g(all-ones mask) - f(x)|
  std::vector<std::pair<std::string, double>> attributions;  // sorted by token
};

// Sparse N x M matrix of attributions over a fixed vocabulary, with one
// predicted class per instance.
class AttributionMatrix {
public:
  struct Row {
    int doc_id = -1;
    int predicted_class = -1;
    double intercept = 0.0;
    double surrogate_r2 = 0.0;
    std::vector<std::pair<int, double>> entries;  // sorted by column
  };

  AttributionMatrix(std::vector<std::string> class_names, std::vector<std::string> vocabulary);

  // When `vocabulary` is empty the columns are induced from the explanations
  // (sorted union of attributed tokens).
  static AttributionMatrix from_explanations(std::vector<std::string> class_names,
                                             std::vector<std::string> vocabulary,
                                             const std::vector<Explanation>& explanations);

  void append_row(Row row);

  std::size_t num_instances() const { return rows_.size(); }
  std::size_t num_features() const { return vocabulary_.size(); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<Row>& rows() const { return rows_; }

  // -1 when the token is not a column.
  int column_of(const std::string& token) const;

private:
  std::vector<std::string> class_names_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> column_index_;
  std::vector<Row> rows_;
};

}  // namespace gale
