#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gale {

struct Document {
  int id = -1;
  std::vector<std::string> tokens;
  std::optional<int> label;
};

struct Dataset {
  std::vector<Document> documents;
  std::vector<std::string> class_names;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

// Lowercases and splits on any non-alphanumeric character. The marks . , ! ?
// survive as single-character tokens; everything else non-alphanumeric is a
// separator. Empty fragments are dropped.
std::vector<std::string> tokenize(std::string_view text);

// One `text<TAB>{0|1}` line per document. Class names are fixed to
// ["negative", "positive"], ids are assigned in line order.
Dataset load_sentiment_tsv(const std::filesystem::path& path);

// One subdirectory per class, one text file per document. Class names are the
// sorted subdirectory names; files are read in sorted order per class.
// Unreadable or empty-after-tokenization files are skipped with a warning;
// *skipped, when given, receives the skip count.
Dataset load_newsgroups_dir(const std::filesystem::path& root, int* skipped = nullptr);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Deterministic stratified split. Each class contributes
// lround(test_fraction * class_size) documents to the test side; both sides
// must end up with at least one document per class. Document ids and relative
// order are preserved.
SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

}  // namespace gale
