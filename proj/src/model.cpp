#include "gale/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gale/error.hpp"
#include "gale/rng.hpp"

namespace gale {

namespace {

std::vector<double> softmax(std::vector<double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

std::vector<double> class_probabilities(const SparseRow& row,
                                        const std::vector<std::vector<double>>& weights,
                                        const std::vector<double>& bias) {
  std::vector<double> logits = bias;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const auto& w = weights[c];
    for (const auto& [j, count] : row) logits[c] += w[j] * count;
  }
  return softmax(std::move(logits));
}

}  // namespace

std::vector<std::string> induce_vocabulary(const Dataset& train) {
  std::set<std::string> seen;
  for (const auto& doc : train.documents) seen.insert(doc.tokens.begin(), doc.tokens.end());
  return {seen.begin(), seen.end()};
}

SparseRow bow_counts(const Document& doc, const std::unordered_map<std::string, int>& index) {
  SparseRow row;
  for (const auto& token : doc.tokens) {
    const auto it = index.find(token);
    if (it == index.end()) continue;  // out-of-vocabulary tokens contribute nothing
    row.emplace_back(it->second, 1.0);
  }
  std::sort(row.begin(), row.end());
  SparseRow merged;
  for (const auto& [j, count] : row) {
    if (!merged.empty() && merged.back().first == j) {
      merged.back().second += count;
    } else {
      merged.emplace_back(j, count);
    }
  }
  return merged;
}

LinearModel::LinearModel(std::vector<std::string> class_names, std::vector<std::string> vocab,
                         std::vector<std::vector<double>> weights, std::vector<double> bias)
    : class_names_(std::move(class_names)),
      vocab_(std::move(vocab)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (class_names_.size() < 2) fail("model", "LinearModel needs at least 2 classes");
  if (weights_.size() != class_names_.size() || bias_.size() != class_names_.size()) {
    fail("model", "LinearModel: weights/bias shape does not match class count");
  }
  for (const auto& w : weights_) {
    if (w.size() != vocab_.size()) fail("model", "LinearModel: weight row width != vocabulary size");
    for (double v : w) {
      if (!std::isfinite(v)) fail("model", "LinearModel: non-finite weight");
    }
  }
  index_.reserve(vocab_.size());
  for (std::size_t j = 0; j < vocab_.size(); ++j) index_.emplace(vocab_[j], static_cast<int>(j));
  if (index_.size() != vocab_.size()) fail("model", "LinearModel: duplicate vocabulary token");
}

std::vector<double> LinearModel::predict_proba(const Document& doc) const {
  return class_probabilities(bow_counts(doc, index_), weights_, bias_);
}

double logistic_objective(const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                          const std::vector<std::vector<double>>& weights,
                          const std::vector<double>& bias, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = class_probabilities(rows[i], weights, bias);
    loss += -std::log(p[labels[i]]);
  }
  loss /= static_cast<double>(rows.size());
  double reg = 0.0;
  for (const auto& w : weights) {
    for (double v : w) reg += v * v;
  }
  return loss + 0.5 * l2 * reg;
}

void logistic_objective_gradient(const std::vector<SparseRow>& rows,
                                 const std::vector<int>& labels,
                                 const std::vector<std::vector<double>>& weights,
                                 const std::vector<double>& bias, double l2,
                                 std::vector<std::vector<double>>* grad_weights,
                                 std::vector<double>* grad_bias) {
  const auto num_classes = weights.size();
  const auto vocab_size = weights.empty() ? 0 : weights[0].size();
  grad_weights->assign(num_classes, std::vector<double>(vocab_size, 0.0));
  grad_bias->assign(num_classes, 0.0);

  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = class_probabilities(rows[i], weights, bias);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double delta = (p[c] - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0)) * inv_n;
      (*grad_bias)[c] += delta;
      auto& gw = (*grad_weights)[c];
      for (const auto& [j, count] : rows[i]) gw[j] += delta * count;
    }
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& gw = (*grad_weights)[c];
    for (std::size_t j = 0; j < vocab_size; ++j) gw[j] += l2 * weights[c][j];
  }
}

LinearModel train_logistic(const Dataset& train, const TrainConfig& cfg) {
  if (train.empty()) fail("model", "train_logistic: empty training set");
  if (train.class_names.size() < 2) fail("model", "train_logistic: need at least 2 classes");
  if (cfg.epochs < 1 || cfg.batch_size < 1) fail("model", "train_logistic: bad epochs/batch_size");

  const auto vocab = induce_vocabulary(train);
  std::unordered_map<std::string, int> index;
  index.reserve(vocab.size());
  for (std::size_t j = 0; j < vocab.size(); ++j) index.emplace(vocab[j], static_cast<int>(j));

  const auto n = train.documents.size();
  std::vector<SparseRow> rows(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& doc = train.documents[i];
    if (!doc.label.has_value()) fail("model", "train_logistic: unlabeled document id " + std::to_string(doc.id));
    rows[i] = bow_counts(doc, index);
    labels[i] = *doc.label;
  }

  const auto num_classes = train.class_names.size();
  std::vector<std::vector<double>> weights(num_classes, std::vector<double>(vocab.size(), 0.0));
  std::vector<double> bias(num_classes, 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, streams::kTrain));

  std::vector<double> col_grad(vocab.size(), 0.0);
  std::vector<int> touched;
  std::vector<std::vector<double>> batch_probs;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);

      // l2 as decoupled decay; the combined step equals plain SGD on the
      // regularized objective
      const double decay = 1.0 - cfg.learning_rate * cfg.l2;
      for (auto& w : weights) {
        for (double& v : w) v *= decay;
      }

      batch_probs.clear();
      for (std::size_t b = start; b < end; ++b) {
        batch_probs.push_back(class_probabilities(rows[order[b]], weights, bias));
      }

      for (std::size_t c = 0; c < num_classes; ++c) {
        touched.clear();
        double bias_grad = 0.0;
        for (std::size_t b = start; b < end; ++b) {
          const auto i = order[b];
          const double delta =
              (batch_probs[b - start][c] - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0)) * inv_b;
          bias_grad += delta;
          for (const auto& [j, count] : rows[i]) {
            if (col_grad[j] == 0.0) touched.push_back(j);
            col_grad[j] += delta * count;
          }
        }
        std::sort(touched.begin(), touched.end());
        auto& w = weights[c];
        for (int j : touched) {
          w[j] -= cfg.learning_rate * col_grad[j];
          col_grad[j] = 0.0;
        }
        bias[c] -= cfg.learning_rate * bias_grad;
      }
    }
    const double loss = logistic_objective(rows, labels, weights, bias, cfg.l2);
    if (!std::isfinite(loss)) {
      fail("model", "train_logistic: non-finite loss after epoch " + std::to_string(epoch + 1) +
                        " (learning_rate=" + std::to_string(cfg.learning_rate) +
                        ", l2=" + std::to_string(cfg.l2) + ")");
    }
  }

  return LinearModel(train.class_names, vocab, std::move(weights), std::move(bias));
}

double accuracy(const BlackBoxModel& model, const Dataset& data) {
  if (data.empty()) fail("model", "accuracy: empty dataset");
  std::size_t hits = 0;
  for (const auto& doc : data.documents) {
    if (!doc.label.has_value()) fail("model", "accuracy: unlabeled document id " + std::to_string(doc.id));
    const auto p = model.predict_proba(doc);
    const auto arg = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
    if (static_cast<int>(arg) == *doc.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace gale
