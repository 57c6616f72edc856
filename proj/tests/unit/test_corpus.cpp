#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "dimminer/corpus.hpp"
#include "dimminer/error.hpp"

using namespace dimminer;

namespace {

std::vector<RawDocument> docs_of(std::initializer_list<const char*> texts) {
  std::vector<RawDocument> out;
  int i = 0;
  for (const char* t : texts) out.push_back({"d" + std::to_string(i++), t, std::nullopt, std::nullopt});
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("tokenize downcases and keeps apostrophe runs") {
  CHECK(tokenize("Great movie!") == std::vector<std::string>{"great", "movie"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("It's 5-star, it's GREAT") ==
        std::vector<std::string>{"it's", "star", "it's", "great"});
  CHECK(tokenize("running ran runs") == std::vector<std::string>{"running", "ran", "runs"});
}

TEST_CASE("build_corpus drops singletons, short and punctuation-only terms") {
  auto docs = docs_of({"alpha beta x ''", "alpha gamma x ''", "beta delta"});
  auto c = build_corpus(docs, Representation::kBoaw);
  const auto& terms = c.vocabulary().terms;
  CHECK(terms == std::vector<std::string>{"alpha", "beta"});
  CHECK(c.vocabulary().doc_freq == std::vector<std::size_t>{2, 2});
  CHECK(c.document(2).features == SparseBinaryVector{1});
}

TEST_CASE("bow cut removes ceil(fraction * V) highest-df terms with term tie-break") {
  // 1000 terms with df >= 2: "t<k>" appears in 2 + (k % 50) documents.
  std::vector<RawDocument> docs(60);
  for (int d = 0; d < 60; ++d) docs[d].id = "doc" + std::to_string(d);
  auto name = [](int k) {
    std::string s = "t";
    for (int x = k; x > 0 || s.size() == 1; x /= 26) s += static_cast<char>('a' + x % 26);
    return s;
  };
  for (int k = 0; k < 1000; ++k) {
    int df = 2 + (k % 50);
    for (int d = 0; d < df; ++d) docs[d].text += " " + name(k);
  }
  auto boaw = build_corpus(docs, Representation::kBoaw);
  REQUIRE(boaw.vocabulary().size() == 1000);
  auto bow = build_corpus(docs, Representation::kBow, nullptr, 0.015);
  CHECK(bow.vocabulary().size() == 985);

  std::size_t min_removed = SIZE_MAX;
  std::size_t max_kept = 0;
  for (std::size_t t = 0; t < boaw.vocabulary().size(); ++t) {
    const auto& term = boaw.vocabulary().terms[t];
    auto df = boaw.vocabulary().doc_freq[t];
    if (bow.vocabulary().find(term)) {
      max_kept = std::max(max_kept, df);
    } else {
      min_removed = std::min(min_removed, df);
    }
  }
  CHECK(min_removed >= max_kept);
  // Every BOW term is also a BOAW term.
  for (const auto& t : bow.vocabulary().terms) CHECK(boaw.vocabulary().find(t).has_value());
}

TEST_CASE("bosw keeps only lexicon words") {
  SubjectivityLexicon lex{{"good"}, {"bad"}};
  auto docs = docs_of({"good good plot", "good plot twist", "bad plot"});
  auto c = build_corpus(docs, Representation::kBosw, &lex);
  CHECK(c.vocabulary().terms == std::vector<std::string>{"good"});
  CHECK(c.document(0).features == SparseBinaryVector{0});
  CHECK(c.document(2).features.empty());
  for (const auto& t : c.vocabulary().terms) CHECK(lex.contains(t));
}

TEST_CASE("build_corpus error paths") {
  auto docs = docs_of({"good plot", "good plot"});
  CHECK(code_of([&] { build_corpus(docs, Representation::kBosw); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { build_corpus(docs, Representation::kBow, nullptr, 1.0); }) == ErrorCode::kConfig);
  auto lonely = docs_of({"alpha", "beta"});
  CHECK(code_of([&] { build_corpus(lonely, Representation::kBow); }) == ErrorCode::kDegenerate);
  std::vector<RawDocument> dup{{"a", "xx yy", {}, {}}, {"a", "xx yy", {}, {}}};
  CHECK(code_of([&] { build_corpus(dup, Representation::kBoaw); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("vectors are binary, sorted, idempotent under vectorize") {
  auto docs = docs_of({"one two two three", "one two three three", "two three four four"});
  auto c = build_corpus(docs, Representation::kBoaw);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& f = c.document(i).features;
    CHECK(std::is_sorted(f.begin(), f.end()));
    CHECK(std::adjacent_find(f.begin(), f.end()) == f.end());
    CHECK(c.vectorize(docs[i].text) == f);
    CHECK(c.vectorize(docs[i].text) == c.vectorize(docs[i].text));
  }
  auto x = c.feature_matrix();
  for (int k = 0; k < x.outerSize(); ++k)
    for (decltype(x)::InnerIterator it(x, k); it; ++it) CHECK(it.value() == 1.0);
}

TEST_CASE("content hash is stable and sensitive") {
  auto a = build_corpus(docs_of({"alpha beta", "alpha beta"}), Representation::kBoaw);
  auto b = build_corpus(docs_of({"alpha beta", "alpha beta"}), Representation::kBoaw);
  auto c = build_corpus(docs_of({"alpha beta", "alpha gamma"}), Representation::kBoaw);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash().size() == 64);
  CHECK(a.content_hash() != c.content_hash());
}

TEST_CASE("load_lexicon") {
  std::istringstream in("good\tpositive\nbad\tnegative\nthe\tneutral\n\nGOOD\tPositive\n");
  auto lex = load_lexicon(in);
  CHECK(lex.positive == std::set<std::string>{"good"});
  CHECK(lex.negative == std::set<std::string>{"bad"});

  std::istringstream empty("");
  CHECK(load_lexicon(empty).empty());

  std::istringstream malformed("good\tpositive\nbad negative\n");
  try {
    load_lexicon(malformed);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream conflict("good\tpositive\nGood\tnegative\n");
  CHECK(code_of([&] { load_lexicon(conflict); }) == ErrorCode::kConflict);
  std::istringstream unknown("good\tgreat\n");
  CHECK(code_of([&] { load_lexicon(unknown); }) == ErrorCode::kParse);
}

TEST_CASE("read_documents_jsonl") {
  std::istringstream in(
      "{\"id\": \"r1\", \"text\": \"Good film\", \"label\": 1}\n"
      "\n"
      "{\"id\": \"r2\", \"text\": \"\", \"domain\": \"kit\"}\n");
  auto docs = read_documents_jsonl(in);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].gold_label == 1);
  CHECK_FALSE(docs[1].gold_label.has_value());
  CHECK(docs[1].domain_tag == "kit");
  CHECK(docs[1].text.empty());

  std::istringstream bad("{\"id\": \"r1\"}\n");
  CHECK(code_of([&] { read_documents_jsonl(bad); }) == ErrorCode::kParse);
}
