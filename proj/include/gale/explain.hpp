#pragma once

#include <cstdint>
#include <vector>

#include "gale/attribution.hpp"
#include "gale/corpus.hpp"
#include "gale/model.hpp"

namespace gale {

struct ExplainerConfig {
  int num_samples = 1000;
  double kernel_width = 25.0;
  int feature_budget = 10;  // k: max attributions kept per instance
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Binary mask over an instance's distinct tokens; 1 keeps the token.
using Mask = std::vector<std::uint8_t>;

// n masks over the document's d distinct tokens. Mask 0 is all-ones; each
// further mask deactivates a uniform z in {1..d} tokens chosen uniformly.
std::vector<Mask> perturb(const Document& doc, int n, std::uint64_t seed);

// exp(-D_cos(mask, all-ones)^2 / width^2); an all-zero mask has D_cos = 1.
double proximity(const Mask& mask, double width);

struct SurrogateFit {
  double intercept = 0.0;
  std::vector<std::pair<int, double>> weights;  // (feature, weight) for the kept features
  double r2 = 0.0;
};

// Proximity-weighted ridge regression on all mask features, then the
// feature_budget features of largest |weight| are refit alone. `selectable`,
// when given, restricts which features may be kept (the full fit still spans
// all of them). The intercept is never penalized.
SurrogateFit fit_surrogate(const std::vector<Mask>& masks, const std::vector<double>& proximities,
                           const std::vector<double>& targets, int feature_budget,
                           double ridge_lambda,
                           const std::vector<std::uint8_t>* selectable = nullptr);

Explanation explain(const BlackBoxModel& model, const Document& doc, const ExplainerConfig& cfg);

// One explanation per test document, assembled into a sparse attribution
// matrix. Columns follow the model's vocabulary when it has one, otherwise
// the sorted union of attributed tokens. Per-document seeds derive from
// (cfg.seed, doc id), so the result does not depend on evaluation order.
AttributionMatrix explain_all(const BlackBoxModel& model, const Dataset& test,
                              const ExplainerConfig& cfg);

}  // namespace gale
