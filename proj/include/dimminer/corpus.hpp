#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace dimminer {

// Bag-of-words with the high document-frequency cut, bag of all words, and
// bag of sentiment (lexicon) words.
enum class Representation { kBow, kBoaw, kBosw };

std::string_view to_string(Representation mode);
Representation parse_representation(std::string_view name);

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<int> gold_label;
  std::optional<std::string> domain_tag;
};

struct SubjectivityLexicon {
  std::set<std::string> positive;
  std::set<std::string> negative;

  bool empty() const { return positive.empty() && negative.empty(); }
  bool contains(const std::string& term) const {
    return positive.count(term) > 0 || negative.count(term) > 0;
  }
};

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::size_t> doc_freq;

  std::size_t size() const { return terms.size(); }
  std::optional<std::uint32_t> find(const std::string& term) const;
};

// Sorted, duplicate-free column indices of the terms a document contains.
using SparseBinaryVector = std::vector<std::uint32_t>;

struct Document {
  std::string id;
  SparseBinaryVector features;
  std::optional<int> gold_label;
  std::optional<std::string> domain_tag;
};

class Corpus {
 public:
  Corpus(std::vector<Document> documents, Vocabulary vocabulary, Representation mode);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& document(std::size_t i) const { return documents_.at(i); }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  Representation mode() const { return mode_; }
  std::size_t size() const { return documents_.size(); }

  SparseBinaryVector vectorize(std::string_view text) const;

  bool has_gold_labels() const;
  // Throws kInvalidArgument when any document lacks a label.
  std::vector<int> gold_labels() const;
  // Position of a document id, if present.
  std::optional<std::size_t> find(const std::string& id) const;

  // documents x vocabulary, entries 1.0.
  Eigen::SparseMatrix<double, Eigen::RowMajor> feature_matrix() const;

  // Stable over processes: SHA-256 of mode, vocabulary, and document vectors.
  const std::string& content_hash() const { return hash_; }

 private:
  std::vector<Document> documents_;
  Vocabulary vocabulary_;
  Representation mode_;
  std::unordered_map<std::string, std::size_t> id_index_;
  std::string hash_;
};

// Maximal runs of [a-z'] after ASCII downcasing; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

Corpus build_corpus(std::span<const RawDocument> docs, Representation mode,
                    const SubjectivityLexicon* lexicon = nullptr,
                    double df_prune_fraction = 0.015);

// `term<TAB>polarity` per line; neutral entries are dropped.
SubjectivityLexicon load_lexicon(std::istream& in);

// One JSON object per line: {"id", "text", "label"?, "domain"?}.
std::vector<RawDocument> read_documents_jsonl(std::istream& in);

}  // namespace dimminer
