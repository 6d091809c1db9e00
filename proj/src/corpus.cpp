#include "gale/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "gale/error.hpp"
#include "gale/rng.hpp"

namespace gale {

namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_kept_punct(char c) { return c == '.' || c == ',' || c == '!' || c == '?'; }

char to_lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string read_whole_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail("io", "read failure on file: " + path.string());
  return buf.str();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(to_lower_ascii(c));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    if (is_kept_punct(c)) tokens.emplace_back(1, c);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Dataset load_sentiment_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("corpus", "cannot open sentiment TSV: " + path.string());

  Dataset dataset;
  dataset.class_names = {"negative", "positive"};

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;

    const auto where = path.filename().string() + ":" + std::to_string(line_number);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      fail("corpus", where + ": expected exactly two tab-separated fields");
    }
    const std::string text = line.substr(0, tab);
    const std::string label_field = line.substr(tab + 1);
    int label;
    if (label_field == "0") {
      label = 0;
    } else if (label_field == "1") {
      label = 1;
    } else {
      fail("corpus", where + ": label must be 0 or 1, got '" + label_field + "'");
    }

    Document doc;
    doc.id = static_cast<int>(dataset.documents.size());
    doc.tokens = tokenize(text);
    doc.label = label;
    if (doc.tokens.empty()) {
      fail("corpus", where + ": sentence has no tokens after tokenization");
    }
    dataset.documents.push_back(std::move(doc));
  }
  if (in.bad()) fail("io", "read failure on file: " + path.string());
  if (dataset.documents.empty()) fail("corpus", path.string() + ": no instances");
  return dataset;
}

Dataset load_newsgroups_dir(const std::filesystem::path& root, int* skipped) {
  if (!std::filesystem::is_directory(root)) {
    fail("corpus", "not a directory: " + root.string());
  }

  std::vector<std::filesystem::path> class_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) fail("corpus", root.string() + ": no class subdirectories");
  if (class_dirs.size() < 2) fail("corpus", root.string() + ": fewer than 2 classes");

  Dataset dataset;
  for (const auto& dir : class_dirs) dataset.class_names.push_back(dir.filename().string());

  int skip_count = 0;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(class_dirs[c])) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::string text;
      try {
        text = read_whole_file(file);
      } catch (const Error&) {
        std::cerr << "warning: skipping unreadable file " << file << "\n";
        ++skip_count;
        continue;
      }
      Document doc;
      doc.id = static_cast<int>(dataset.documents.size());
      doc.tokens = tokenize(text);
      doc.label = static_cast<int>(c);
      if (doc.tokens.empty()) {
        std::cerr << "warning: skipping file with no tokens " << file << "\n";
        ++skip_count;
        continue;
      }
      dataset.documents.push_back(std::move(doc));
    }
  }
  if (skip_count > 0) {
    std::cerr << "warning: skipped " << skip_count << " file(s) under " << root << "\n";
  }
  if (skipped) *skipped = skip_count;
  if (dataset.documents.empty()) fail("corpus", root.string() + ": no instances");
  return dataset;
}

SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (dataset.empty()) fail("corpus", "split: dataset is empty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail("corpus", "split: test_fraction must be in (0,1)");
  }

  // class index -> positions in dataset.documents
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
    const auto& doc = dataset.documents[i];
    if (!doc.label.has_value()) fail("corpus", "split: unlabeled document id " + std::to_string(doc.id));
    by_class[*doc.label].push_back(i);
  }

  std::vector<char> in_test(dataset.documents.size(), 0);
  for (const auto& [label, positions] : by_class) {
    const auto n = positions.size();
    const std::string cname = label >= 0 && label < static_cast<int>(dataset.class_names.size())
                                  ? dataset.class_names[label]
                                  : std::to_string(label);
    if (n < 2) {
      fail("corpus", "split: class '" + cname + "' has fewer than 2 documents");
    }
    const auto want = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(n)));
    if (want < 1 || want > n - 1) {
      fail("corpus", "split: test_fraction " + std::to_string(test_fraction) + " leaves class '" +
                         cname + "' (" + std::to_string(n) + " docs) empty on one side");
    }
    Rng rng(derive_seed(seed, streams::kSplit, static_cast<std::uint64_t>(label)));
    for (std::size_t idx : rng.sample_indices(n, want)) in_test[positions[idx]] = 1;
  }

  SplitResult result;
  result.train.class_names = dataset.class_names;
  result.test.class_names = dataset.class_names;
  for (std::size_t i = 0; i < dataset.documents.size(); ++i) {
    (in_test[i] ? result.test : result.train).documents.push_back(dataset.documents[i]);
  }
  return result;
}

}  // namespace gale
