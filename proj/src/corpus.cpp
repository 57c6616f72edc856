#include "dimminer/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>

#include <json.hpp>

#include "dimminer/error.hpp"
#include "dimminer/hash.hpp"

namespace dimminer {

std::string_view to_string(Representation mode) {
  switch (mode) {
    case Representation::kBow: return "bow";
    case Representation::kBoaw: return "boaw";
    case Representation::kBosw: return "bosw";
  }
  return "bow";
}

Representation parse_representation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bow") return Representation::kBow;
  if (lower == "boaw") return Representation::kBoaw;
  if (lower == "bosw") return Representation::kBosw;
  throw Error(ErrorCode::kConfig, "unknown representation mode '" + std::string(name) + "'");
}

std::optional<std::uint32_t> Vocabulary::find(const std::string& term) const {
  auto it = index.find(term);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

namespace {

bool is_token_char(char c) { return (c >= 'a' && c <= 'z') || c == '\''; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool has_letter(const std::string& term) {
  return std::any_of(term.begin(), term.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

// Length-one, punctuation-only, and digit-only terms never enter a vocabulary.
bool admissible_term(const std::string& term) { return term.size() >= 2 && has_letter(term); }

std::vector<std::string> unique_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

std::string hash_corpus(const std::vector<Document>& docs, const Vocabulary& vocab,
                        Representation mode) {
  ContentHasher h;
  h.field(to_string(mode));
  h.field(static_cast<std::uint64_t>(vocab.size()));
  for (const auto& t : vocab.terms) h.field(t);
  h.field(static_cast<std::uint64_t>(docs.size()));
  for (const auto& d : docs) {
    h.field(d.id);
    h.field(static_cast<std::uint64_t>(d.features.size()));
    for (auto c : d.features) h.field(static_cast<std::uint64_t>(c));
    h.field(d.gold_label ? static_cast<std::uint64_t>(static_cast<std::int64_t>(*d.gold_label))
                         : ~std::uint64_t{0});
  }
  return h.hex_digest();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    char c = ascii_lower(raw);
    if (is_token_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Corpus::Corpus(std::vector<Document> documents, Vocabulary vocabulary, Representation mode)
    : documents_(std::move(documents)), vocabulary_(std::move(vocabulary)), mode_(mode) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (documents_[i].id.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "document " + std::to_string(i) + " has an empty id");
    }
    if (!id_index_.emplace(documents_[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate document id '" + documents_[i].id + "'");
    }
  }
  hash_ = hash_corpus(documents_, vocabulary_, mode_);
}

SparseBinaryVector Corpus::vectorize(std::string_view text) const {
  SparseBinaryVector v;
  for (const auto& tok : unique_tokens(text)) {
    if (auto col = vocabulary_.find(tok)) v.push_back(*col);
  }
  std::sort(v.begin(), v.end());
  return v;
}

bool Corpus::has_gold_labels() const {
  return !documents_.empty() &&
         std::all_of(documents_.begin(), documents_.end(),
                     [](const Document& d) { return d.gold_label.has_value(); });
}

std::vector<int> Corpus::gold_labels() const {
  std::vector<int> labels;
  labels.reserve(documents_.size());
  for (const auto& d : documents_) {
    if (!d.gold_label) {
      throw Error(ErrorCode::kInvalidArgument, "document '" + d.id + "' has no gold label");
    }
    labels.push_back(*d.gold_label);
  }
  return labels;
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> Corpus::feature_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    for (auto c : documents_[i].features) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(c), 1.0);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> x(static_cast<Eigen::Index>(documents_.size()),
                                                 static_cast<Eigen::Index>(vocabulary_.size()));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

Corpus build_corpus(std::span<const RawDocument> docs, Representation mode,
                    const SubjectivityLexicon* lexicon, double df_prune_fraction) {
  if (mode == Representation::kBosw && lexicon == nullptr) {
    throw Error(ErrorCode::kConfig, "bosw representation requires a subjectivity lexicon");
  }
  if (!(df_prune_fraction >= 0.0 && df_prune_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "df_prune_fraction must lie in [0, 1)");
  }

  std::vector<std::vector<std::string>> doc_tokens;
  doc_tokens.reserve(docs.size());
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    doc_tokens.push_back(unique_tokens(d.text));
    for (const auto& t : doc_tokens.back()) ++df[t];
  }

  std::vector<std::pair<std::string, std::size_t>> survivors;
  for (const auto& [term, count] : df) {
    if (count >= 2 && admissible_term(term)) survivors.emplace_back(term, count);
  }

  if (mode == Representation::kBow && !survivors.empty()) {
    auto by_df = survivors;
    std::sort(by_df.begin(), by_df.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    // Guard the product against representation error (0.015 * 1000 must cut 15).
    auto cut = static_cast<std::size_t>(
        std::ceil(df_prune_fraction * static_cast<double>(by_df.size()) - 1e-9));
    std::set<std::string> removed;
    for (std::size_t i = 0; i < cut && i < by_df.size(); ++i) removed.insert(by_df[i].first);
    std::erase_if(survivors, [&](const auto& p) { return removed.count(p.first) > 0; });
  } else if (mode == Representation::kBosw) {
    std::erase_if(survivors, [&](const auto& p) { return !lexicon->contains(p.first); });
  }

  if (survivors.empty()) {
    throw Error(ErrorCode::kDegenerate, "no vocabulary terms survive pruning");
  }

  Vocabulary vocab;
  for (const auto& [term, count] : survivors) {
    vocab.index.emplace(term, static_cast<std::uint32_t>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.doc_freq.push_back(count);
  }

  std::vector<Document> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Document d{docs[i].id, {}, docs[i].gold_label, docs[i].domain_tag};
    for (const auto& t : doc_tokens[i]) {
      if (auto col = vocab.find(t)) d.features.push_back(*col);
    }
    std::sort(d.features.begin(), d.features.end());
    out.push_back(std::move(d));
  }
  return Corpus(std::move(out), std::move(vocab), mode);
}

SubjectivityLexicon load_lexicon(std::istream& in) {
  SubjectivityLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
  };
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ascii_lower);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) +
                                         ": expected term<TAB>polarity");
    }
    auto term = lower(trim(line.substr(0, tab)));
    auto polarity = lower(trim(line.substr(tab + 1)));
    if (term.empty()) {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) + ": empty term");
    }
    if (polarity == "neutral") continue;
    std::set<std::string>* target = nullptr;
    std::set<std::string>* other = nullptr;
    if (polarity == "positive") {
      target = &lex.positive;
      other = &lex.negative;
    } else if (polarity == "negative") {
      target = &lex.negative;
      other = &lex.positive;
    } else {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) +
                                         ": unknown polarity '" + polarity + "'");
    }
    if (other->count(term) > 0) {
      throw Error(ErrorCode::kConflict, "lexicon line " + std::to_string(line_no) + ": term '" +
                                            term + "' listed as both positive and negative");
    }
    target->insert(term);
  }
  return lex;
}

std::vector<RawDocument> read_documents_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RawDocument d;
      d.id = j.at("id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      if (j.contains("label") && !j["label"].is_null()) d.gold_label = j["label"].get<int>();
      if (j.contains("domain") && !j["domain"].is_null()) {
        d.domain_tag = j["domain"].get<std::string>();
      }
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace dimminer
