#include "gale/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "gale/error.hpp"

namespace gale {

namespace {

// column -> sum over instances of |W_ij|, plus nonzero occurrence counts
struct ColumnSums {
  std::vector<double> abs_sum;
  std::vector<std::size_t> occurrences;
  std::vector<std::vector<double>> class_abs_sum;          // class x feature
  std::vector<std::vector<std::size_t>> class_occurrences;  // class x feature
};

ColumnSums column_sums(const AttributionMatrix& w) {
  const auto m = w.num_features();
  const auto l = w.class_names().size();
  ColumnSums sums;
  sums.abs_sum.assign(m, 0.0);
  sums.occurrences.assign(m, 0);
  sums.class_abs_sum.assign(l, std::vector<double>(m, 0.0));
  sums.class_occurrences.assign(l, std::vector<std::size_t>(m, 0));
  for (const auto& row : w.rows()) {
    for (const auto& [j, value] : row.entries) {
      if (value == 0.0) continue;  // stored zeros are not occurrences
      const double a = std::abs(value);
      sums.abs_sum[j] += a;
      sums.occurrences[j] += 1;
      sums.class_abs_sum[row.predicted_class][j] += a;
      sums.class_occurrences[row.predicted_class][j] += 1;
    }
  }
  return sums;
}

void require_nonempty(const AttributionMatrix& w, const char* op) {
  if (w.num_instances() == 0) fail("aggregate", std::string(op) + ": empty attribution matrix");
}

// the weighting factor of the homogeneity aggregation, per feature
struct HomogeneityWeights {
  std::vector<double> entropy;
  std::vector<double> weight;
};

HomogeneityWeights homogeneity_weights(const AttributionMatrix& w, const ColumnSums& sums) {
  const auto m = w.num_features();
  const auto dist = class_distribution(w);
  HomogeneityWeights hw;
  hw.entropy.assign(m, 0.0);
  hw.weight.assign(m, 1.0);

  double h_min = 0.0, h_max = 0.0;
  bool first = true;
  for (std::size_t j = 0; j < m; ++j) {
    if (!dist.defined[j]) continue;
    hw.entropy[j] = entropy(dist.p[j]);
    if (first) {
      h_min = h_max = hw.entropy[j];
      first = false;
    } else {
      h_min = std::min(h_min, hw.entropy[j]);
      h_max = std::max(h_max, hw.entropy[j]);
    }
  }
  const double range = h_max - h_min;
  for (std::size_t j = 0; j < m; ++j) {
    if (!dist.defined[j] || sums.abs_sum[j] == 0.0) continue;
    hw.weight[j] = range > 0.0 ? 1.0 - (hw.entropy[j] - h_min) / range : 1.0;
  }
  return hw;
}

}  // namespace

std::string_view to_string(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::lime: return "lime";
    case AggregationKind::average: return "average";
    case AggregationKind::homogeneity: return "homogeneity";
  }
  fail("internal", "unknown aggregation kind");
}

AggregationKind aggregation_kind_from_string(std::string_view name) {
  if (name == "lime") return AggregationKind::lime;
  if (name == "average") return AggregationKind::average;
  if (name == "homogeneity") return AggregationKind::homogeneity;
  fail("config", "unknown aggregation kind '" + std::string(name) +
                     "' (expected lime, average, or homogeneity)");
}

ImportanceVector lime_importance(const AttributionMatrix& w) {
  require_nonempty(w, "lime_importance");
  const auto sums = column_sums(w);
  ImportanceVector out;
  out.kind = AggregationKind::lime;
  out.vocabulary = w.vocabulary();
  out.scores.resize(w.num_features());
  out.has_entries.resize(w.num_features());
  for (std::size_t j = 0; j < w.num_features(); ++j) {
    out.scores[j] = std::sqrt(sums.abs_sum[j]);
    out.has_entries[j] = sums.occurrences[j] > 0;
  }
  return out;
}

ImportanceVector avg_importance(const AttributionMatrix& w) {
  require_nonempty(w, "avg_importance");
  const auto sums = column_sums(w);
  ImportanceVector out;
  out.kind = AggregationKind::average;
  out.vocabulary = w.vocabulary();
  out.scores.resize(w.num_features());
  out.has_entries.resize(w.num_features());
  for (std::size_t j = 0; j < w.num_features(); ++j) {
    out.scores[j] = sums.occurrences[j] > 0
                        ? sums.abs_sum[j] / static_cast<double>(sums.occurrences[j])
                        : 0.0;
    out.has_entries[j] = sums.occurrences[j] > 0;
  }
  return out;
}

ClassDistribution class_distribution(const AttributionMatrix& w) {
  require_nonempty(w, "class_distribution");
  const auto sums = column_sums(w);
  const auto m = w.num_features();
  const auto l = w.class_names().size();

  ClassDistribution dist;
  dist.p.assign(m, std::vector<double>(l, 0.0));
  dist.defined.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    double denom = 0.0;
    for (std::size_t c = 0; c < l; ++c) denom += std::sqrt(sums.class_abs_sum[c][j]);
    if (denom == 0.0) continue;  // no mass: distribution undefined
    dist.defined[j] = 1;
    for (std::size_t c = 0; c < l; ++c) {
      dist.p[j][c] = std::sqrt(sums.class_abs_sum[c][j]) / denom;
    }
  }
  return dist;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p < 0.0) fail("aggregate", "entropy: negative probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

ImportanceVector homogeneity_importance(const AttributionMatrix& w) {
  require_nonempty(w, "homogeneity_importance");
  const auto sums = column_sums(w);
  const auto hw = homogeneity_weights(w, sums);

  ImportanceVector out;
  out.kind = AggregationKind::homogeneity;
  out.vocabulary = w.vocabulary();
  out.scores.resize(w.num_features());
  out.entropy = hw.entropy;
  out.weight = hw.weight;
  out.has_entries.resize(w.num_features());
  for (std::size_t j = 0; j < w.num_features(); ++j) {
    out.scores[j] = hw.weight[j] * std::sqrt(sums.abs_sum[j]);
    out.has_entries[j] = sums.occurrences[j] > 0;
  }
  return out;
}

ImportanceVector aggregate(const AttributionMatrix& w, AggregationKind kind) {
  switch (kind) {
    case AggregationKind::lime: return lime_importance(w);
    case AggregationKind::average: return avg_importance(w);
    case AggregationKind::homogeneity: return homogeneity_importance(w);
  }
  fail("internal", "unknown aggregation kind");
}

ClassImportanceMatrix class_importance(const AttributionMatrix& w, AggregationKind kind) {
  require_nonempty(w, "class_importance");
  const auto sums = column_sums(w);
  const auto m = w.num_features();
  const auto l = w.class_names().size();

  ClassImportanceMatrix out;
  out.kind = kind;
  out.class_names = w.class_names();
  out.vocabulary = w.vocabulary();
  out.scores.assign(l, std::vector<double>(m, 0.0));

  switch (kind) {
    case AggregationKind::lime:
      for (std::size_t c = 0; c < l; ++c) {
        for (std::size_t j = 0; j < m; ++j) {
          out.scores[c][j] = std::sqrt(sums.class_abs_sum[c][j]);
        }
      }
      break;
    case AggregationKind::average:
      for (std::size_t c = 0; c < l; ++c) {
        for (std::size_t j = 0; j < m; ++j) {
          out.scores[c][j] = sums.class_occurrences[c][j] > 0
                                 ? sums.class_abs_sum[c][j] /
                                       static_cast<double>(sums.class_occurrences[c][j])
                                 : 0.0;
        }
      }
      break;
    case AggregationKind::homogeneity: {
      const auto hw = homogeneity_weights(w, sums);
      for (std::size_t c = 0; c < l; ++c) {
        for (std::size_t j = 0; j < m; ++j) {
          out.scores[c][j] = hw.weight[j] * std::sqrt(sums.class_abs_sum[c][j]);
        }
      }
      break;
    }
  }
  return out;
}

std::vector<std::vector<RankedFeature>> top_k_per_class(const ClassImportanceMatrix& m, int k) {
  if (k < 1) fail("aggregate", "top_k_per_class: k must be >= 1");
  std::vector<std::vector<RankedFeature>> out(m.class_names.size());
  for (std::size_t c = 0; c < m.class_names.size(); ++c) {
    std::vector<RankedFeature> ranked;
    for (std::size_t j = 0; j < m.vocabulary.size(); ++j) {
      if (m.scores[c][j] > 0.0) ranked.push_back({m.vocabulary[j], m.scores[c][j]});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.token < b.token;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);
    out[c] = std::move(ranked);
  }
  return out;
}

}  // namespace gale
