#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gale/attribution.hpp"

namespace gale {

enum class AggregationKind { lime, average, homogeneity };

std::string_view to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(std::string_view name);

// Global per-feature importance. Features with no nonzero attribution score 0
// under every kind. For kind == homogeneity the per-feature entropy and the
// weighting factor in [0,1] are carried along (entropy 0 / weight 1 for
// features without entries).
struct ImportanceVector {
  AggregationKind kind = AggregationKind::lime;
  std::vector<std::string> vocabulary;
  std::vector<double> scores;
  std::vector<double> entropy;
  std::vector<double> weight;
  std::vector<std::uint8_t> has_entries;
};

struct ClassImportanceMatrix {
  AggregationKind kind = AggregationKind::lime;
  std::vector<std::string> class_names;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<double>> scores;  // class x feature
};

// I_j = sqrt(sum_i |W_ij|)
ImportanceVector lime_importance(const AttributionMatrix& w);

// I_j = sum_i |W_ij| / #{i : W_ij != 0}; stored-but-zero entries do not count
// as occurrences.
ImportanceVector avg_importance(const AttributionMatrix& w);

// Per-feature distribution of importance mass over predicted classes,
// p_cj = sqrt(sum_{i in S_c} |W_ij|) / sum_c' sqrt(sum_{i in S_c'} |W_ij|).
// Features with no mass are undefined and flagged instead.
struct ClassDistribution {
  std::vector<std::vector<double>> p;  // feature x class
  std::vector<std::uint8_t> defined;
};
ClassDistribution class_distribution(const AttributionMatrix& w);

// Shannon entropy, natural log, with 0 ln 0 = 0.
double entropy(std::span<const double> distribution);

// I^H_j = (1 - (H_j - H_min)/(H_max - H_min)) * I^LIME_j, where H_min/H_max
// range over features with entries; every weight is 1 when H_max == H_min.
ImportanceVector homogeneity_importance(const AttributionMatrix& w);

ImportanceVector aggregate(const AttributionMatrix& w, AggregationKind kind);

// Per-class variants. For homogeneity the weighting factor stays the global
// one, computed over all classes.
ClassImportanceMatrix class_importance(const AttributionMatrix& w, AggregationKind kind);

struct RankedFeature {
  std::string token;
  double score = 0.0;
};

// Per class, the k highest-scoring tokens; ties break by ascending token,
// zero scores are excluded.
std::vector<std::vector<RankedFeature>> top_k_per_class(const ClassImportanceMatrix& m, int k);

}  // namespace gale
