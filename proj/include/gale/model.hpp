#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gale/corpus.hpp"

namespace gale {

// Black box prediction function f: class-probability queries only.
class BlackBoxModel {
public:
  virtual ~BlackBoxModel() = default;

  virtual const std::vector<std::string>& class_names() const = 0;
  virtual std::vector<double> predict_proba(const Document& doc) const = 0;

  virtual std::vector<std::vector<double>> predict_proba_batch(
      std::span<const Document> docs) const {
    std::vector<std::vector<double>> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) out.push_back(predict_proba(doc));
    return out;
  }

  // Closed training vocabulary, empty for open-vocabulary models. The
  // explainer never attributes tokens outside a closed vocabulary.
  virtual const std::vector<std::string>& vocabulary() const {
    static const std::vector<std::string> kEmpty;
    return kEmpty;
  }
};

// Dense token counts are never materialized; documents become sparse
// (column, count) rows.
using SparseRow = std::vector<std::pair<int, double>>;

std::vector<std::string> induce_vocabulary(const Dataset& train);

SparseRow bow_counts(const Document& doc, const std::unordered_map<std::string, int>& index);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// Multinomial logistic regression over bag-of-words counts.
class LinearModel : public BlackBoxModel {
public:
  LinearModel(std::vector<std::string> class_names, std::vector<std::string> vocab,
              std::vector<std::vector<double>> weights, std::vector<double> bias);

  const std::vector<std::string>& class_names() const override { return class_names_; }
  const std::vector<std::string>& vocabulary() const override { return vocab_; }
  std::vector<double> predict_proba(const Document& doc) const override;

  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  const std::unordered_map<std::string, int>& vocab_index() const { return index_; }

private:
  std::vector<std::string> class_names_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<double>> weights_;  // class x vocab
  std::vector<double> bias_;
};

LinearModel train_logistic(const Dataset& train, const TrainConfig& cfg);

double accuracy(const BlackBoxModel& model, const Dataset& data);

// Value and gradient of the l2-regularized multinomial logistic objective on
// an explicit batch: mean cross-entropy + (l2/2) * ||weights||^2 (bias
// unpenalized). Shared by the trainer and the finite-difference check.
double logistic_objective(const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                          const std::vector<std::vector<double>>& weights,
                          const std::vector<double>& bias, double l2);

void logistic_objective_gradient(const std::vector<SparseRow>& rows,
                                 const std::vector<int>& labels,
                                 const std::vector<std::vector<double>>& weights,
                                 const std::vector<double>& bias, double l2,
                                 std::vector<std::vector<double>>* grad_weights,
                                 std::vector<double>* grad_bias);

struct ExternalModelConfig {
  std::string command;  // started via /bin/sh -c
  std::vector<std::string> class_names;
  double batch_timeout_seconds = 30.0;
};

// Adapter for an external scorer speaking the line protocol: one line of
// tab-joined tokens per document, batch terminated by a blank line; the reply
// is one line per document of space-joined probabilities in class_names
// order. Protocol access is serialized; concurrent callers queue.
class ExternalModel : public BlackBoxModel {
public:
  explicit ExternalModel(ExternalModelConfig cfg);
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  const std::vector<std::string>& class_names() const override { return cfg_.class_names; }
  std::vector<double> predict_proba(const Document& doc) const override;
  std::vector<std::vector<double>> predict_proba_batch(
      std::span<const Document> docs) const override;

private:
  struct Process;

  ExternalModelConfig cfg_;
  std::unique_ptr<Process> proc_;
  mutable std::mutex mutex_;
};

}  // namespace gale
