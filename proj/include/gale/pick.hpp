#pragma once

#include <vector>

#include "gale/aggregate.hpp"
#include "gale/attribution.hpp"

namespace gale {

struct PickOptions {
  // Coverage tests W_ij > 0. Setting this counts negative attributions too
  // (|W_ij| > 0).
  bool count_negative_attributions = false;
};

struct PickResult {
  std::vector<int> chosen;             // doc ids, greedy order
  std::vector<double> coverage_trace;  // coverage after each addition
};

// c(S, W, I) = sum_j [exists i in S : W_ij > 0] * I_j
double coverage(const std::vector<int>& instance_ids, const AttributionMatrix& w,
                const ImportanceVector& importance, const PickOptions& options = {});

// Greedy marginal-gain maximization of coverage, up to `budget` instances.
// Ties break toward the lowest doc id; selection stops early once the best
// marginal gain is zero.
PickResult submodular_pick(const AttributionMatrix& w, const ImportanceVector& importance,
                           int budget, const PickOptions& options = {});

}  // namespace gale
