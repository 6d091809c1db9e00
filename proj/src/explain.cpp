#include "gale/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "gale/error.hpp"
#include "gale/rng.hpp"

namespace gale {

namespace {

std::vector<std::string> distinct_tokens(const Document& doc) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& token : doc.tokens) {
    if (seen.insert(token).second) out.push_back(token);
  }
  return out;
}

std::vector<Mask> sample_masks(std::size_t d, int n, std::uint64_t seed) {
  if (d == 0) fail("explain", "nothing to perturb: document has no tokens");
  if (n < 1) fail("explain", "perturb: need at least one sample");
  std::vector<Mask> masks;
  masks.reserve(n);
  masks.emplace_back(d, std::uint8_t{1});  // the instance itself
  Rng rng(seed);
  for (int i = 1; i < n; ++i) {
    Mask mask(d, std::uint8_t{1});
    const auto z = 1 + rng.below(d);  // how many tokens to deactivate
    for (std::size_t idx : rng.sample_indices(d, z)) mask[idx] = 0;
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace

void ExplainerConfig::validate() const {
  if (num_samples < 10) fail("config", "explainer.num_samples must be >= 10");
  if (!(kernel_width > 0)) fail("config", "explainer.kernel_width must be positive");
  if (feature_budget < 1) fail("config", "explainer.feature_budget must be >= 1");
  if (ridge_lambda < 0) fail("config", "explainer.ridge_lambda must be >= 0");
}

std::vector<Mask> perturb(const Document& doc, int n, std::uint64_t seed) {
  return sample_masks(distinct_tokens(doc).size(), n, seed);
}

double proximity(const Mask& mask, double width) {
  if (mask.empty()) fail("explain", "proximity: empty mask");
  std::size_t active = 0;
  for (auto bit : mask) active += bit;
  // cosine distance between a binary mask and the all-ones vector
  const double d_cos =
      active == 0 ? 1.0
                  : 1.0 - std::sqrt(static_cast<double>(active) / static_cast<double>(mask.size()));
  return std::exp(-(d_cos * d_cos) / (width * width));
}

SurrogateFit fit_surrogate(const std::vector<Mask>& masks, const std::vector<double>& proximities,
                           const std::vector<double>& targets, int feature_budget,
                           double ridge_lambda, const std::vector<std::uint8_t>* selectable) {
  if (masks.empty()) fail("explain", "fit_surrogate: no samples");
  const std::size_t n = masks.size();
  const std::size_t d = masks[0].size();
  if (proximities.size() != n || targets.size() != n) {
    fail("explain", "fit_surrogate: masks/proximities/targets length mismatch");
  }
  for (double t : targets) {
    if (!std::isfinite(t)) fail("explain", "fit_surrogate: non-finite target");
  }
  if (selectable && selectable->size() != d) {
    fail("explain", "fit_surrogate: selectable length mismatch");
  }

  // weighted ridge over the given feature columns; intercept unpenalized
  const auto solve = [&](const std::vector<int>& columns) {
    const auto p = columns.size();
    Eigen::MatrixXd design(n, p + 1);   // rows pre-scaled by sqrt(proximity)
    Eigen::VectorXd response(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double w = std::sqrt(proximities[s]);
      design(s, 0) = w;
      for (std::size_t c = 0; c < p; ++c) design(s, c + 1) = w * masks[s][columns[c]];
      response(s) = w * targets[s];
    }
    Eigen::MatrixXd normal = design.transpose() * design;
    for (std::size_t c = 1; c <= p; ++c) normal(c, c) += ridge_lambda;
    Eigen::VectorXd moment = design.transpose() * response;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
      fail("explain", "fit_surrogate: singular normal system");
    }
    Eigen::VectorXd coef = ldlt.solve(moment);
    if (!coef.allFinite()) fail("explain", "fit_surrogate: non-finite solution");
    return coef;
  };

  std::vector<int> all_columns(d);
  for (std::size_t j = 0; j < d; ++j) all_columns[j] = static_cast<int>(j);
  const Eigen::VectorXd full = solve(all_columns);

  // keep the feature_budget selectable features of largest |weight|
  std::vector<int> candidates;
  for (std::size_t j = 0; j < d; ++j) {
    if (!selectable || (*selectable)[j]) candidates.push_back(static_cast<int>(j));
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    const double wa = std::abs(full(a + 1)), wb = std::abs(full(b + 1));
    if (wa != wb) return wa > wb;
    return a < b;
  });
  if (candidates.size() > static_cast<std::size_t>(feature_budget)) {
    candidates.resize(feature_budget);
  }
  std::sort(candidates.begin(), candidates.end());

  const Eigen::VectorXd kept = solve(candidates);

  SurrogateFit fit;
  fit.intercept = kept(0);
  fit.weights.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    fit.weights.emplace_back(candidates[c], kept(c + 1));
  }

  // weighted R^2 of the refit
  double weight_sum = 0.0, mean = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    weight_sum += proximities[s];
    mean += proximities[s] * targets[s];
  }
  mean /= weight_sum;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double pred = fit.intercept;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      pred += kept(c + 1) * masks[s][candidates[c]];
    }
    const double r = targets[s] - pred;
    const double t = targets[s] - mean;
    ss_res += proximities[s] * r * r;
    ss_tot += proximities[s] * t * t;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

Explanation explain(const BlackBoxModel& model, const Document& doc, const ExplainerConfig& cfg) {
  cfg.validate();
  const auto tokens = distinct_tokens(doc);
  if (tokens.empty()) fail("explain", "nothing to perturb: document has no tokens");
  const std::size_t d = tokens.size();

  const auto masks =
      sample_masks(d, cfg.num_samples,
                   derive_seed(cfg.seed, streams::kExplain, static_cast<std::uint64_t>(doc.id)));

  const auto base_probs = model.predict_proba(doc);
  const int predicted = static_cast<int>(
      std::distance(base_probs.begin(), std::max_element(base_probs.begin(), base_probs.end())));

  // masked variants: drop every positional occurrence of a deactivated token
  std::unordered_map<std::string, std::size_t> slot;
  slot.reserve(d);
  for (std::size_t j = 0; j < d; ++j) slot.emplace(tokens[j], j);

  std::vector<Document> variants;
  variants.reserve(masks.size());
  for (const auto& mask : masks) {
    Document variant;
    variant.id = doc.id;
    for (const auto& token : doc.tokens) {
      if (mask[slot.at(token)]) variant.tokens.push_back(token);
    }
    variants.push_back(std::move(variant));
  }

  const auto probs = model.predict_proba_batch(variants);
  std::vector<double> targets(masks.size());
  std::vector<double> proximities(masks.size());
  for (std::size_t s = 0; s < masks.size(); ++s) {
    targets[s] = probs[s][predicted];
    proximities[s] = proximity(masks[s], cfg.kernel_width);
  }

  // tokens outside a closed model vocabulary are never attributed
  const auto& vocab = model.vocabulary();
  std::vector<std::uint8_t> selectable;
  const std::vector<std::uint8_t>* selectable_ptr = nullptr;
  if (!vocab.empty()) {
    std::unordered_set<std::string> known(vocab.begin(), vocab.end());
    selectable.resize(d);
    for (std::size_t j = 0; j < d; ++j) selectable[j] = known.count(tokens[j]) ? 1 : 0;
    selectable_ptr = &selectable;
  }

  const auto fit =
      fit_surrogate(masks, proximities, targets, cfg.feature_budget, cfg.ridge_lambda, selectable_ptr);

  Explanation expl;
  expl.doc_id = doc.id;
  expl.predicted_class = predicted;
  expl.intercept = fit.intercept;
  expl.surrogate_r2 = fit.r2;
  double g_full = fit.intercept;
  for (const auto& [j, w] : fit.weights) {
    expl.attributions.emplace_back(tokens[j], w);
    g_full += w;
  }
  expl.local_fidelity = std::abs(g_full - targets[0]);
  if (!std::isfinite(expl.local_fidelity)) fail("explain", "non-finite local fidelity");
  std::sort(expl.attributions.begin(), expl.attributions.end());
  return expl;
}

AttributionMatrix explain_all(const BlackBoxModel& model, const Dataset& test,
                              const ExplainerConfig& cfg) {
  if (test.empty()) fail("explain", "explain_all: empty test set");
  std::vector<Explanation> explanations;
  explanations.reserve(test.size());
  for (const auto& doc : test.documents) {
    try {
      explanations.push_back(explain(model, doc, cfg));
    } catch (const Error& e) {
      fail(e.category(), "explain_all: document " + std::to_string(doc.id) + ": " + e.what());
    }
  }
  return AttributionMatrix::from_explanations(test.class_names, model.vocabulary(), explanations);
}

}  // namespace gale
