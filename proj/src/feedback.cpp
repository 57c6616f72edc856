#include "dimminer/feedback.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "dimminer/error.hpp"
#include "dimminer/session_io.hpp"

namespace dimminer {

std::string_view to_string(SelectionSource s) {
  switch (s) {
    case SelectionSource::kHuman: return "HUMAN";
    case SelectionSource::kLexicon: return "LEXICON";
    case SelectionSource::kAdapted: return "ADAPTED";
  }
  return "HUMAN";
}

SelectionSource parse_selection_source(std::string_view name) {
  if (name == "HUMAN") return SelectionSource::kHuman;
  if (name == "LEXICON") return SelectionSource::kLexicon;
  if (name == "ADAPTED") return SelectionSource::kAdapted;
  throw Error(ErrorCode::kInvalidArgument, "unknown selection source '" + std::string(name) + "'");
}

namespace {

std::size_t overlap(const TermSet& a, const TermSet& b) {
  const TermSet& small = a.size() <= b.size() ? a : b;
  const TermSet& large = a.size() <= b.size() ? b : a;
  std::size_t count = 0;
  for (const auto& t : small) count += large.count(t);
  return count;
}

TermSet term_set(const FeatureList& list) {
  TermSet s;
  for (const auto& e : list.entries) s.insert(e.term);
  return s;
}

SelectionScore select_best(const TermSet& src1, const TermSet& src2,
                           std::span<const DimensionProfile> targets) {
  SelectionScore out;
  bool have = false;
  for (const auto& t : targets) {
    auto s = eig_similarity(src1, src2, term_set(t.list_c1), term_set(t.list_c2));
    out.candidates.emplace_back(t.eig_index, s.score);
    if (!have || s.score > out.score || (s.score == out.score && t.eig_index < out.eig_index)) {
      if (have) out.second_best_score = std::max(out.second_best_score, out.score);
      out.eig_index = t.eig_index;
      out.score = s.score;
      out.crossed = s.crossed;
      have = true;
    } else {
      out.second_best_score = std::max(out.second_best_score, s.score);
    }
  }
  out.gap = out.score - out.second_best_score;
  return out;
}

}  // namespace

PairingScore eig_similarity(const TermSet& a1, const TermSet& a2, const TermSet& b1,
                            const TermSet& b2) {
  const std::size_t straight = overlap(a1, b1) + overlap(a2, b2);
  const std::size_t crossed = overlap(a1, b2) + overlap(a2, b1);
  if (crossed > straight) return {crossed, true};
  return {straight, false};
}

PairingScore eig_similarity(const DimensionProfile& a, const DimensionProfile& b) {
  return eig_similarity(term_set(a.list_c1), term_set(a.list_c2), term_set(b.list_c1),
                        term_set(b.list_c2));
}

SelectionScore adapt_select(const DimensionProfile& source, std::span<const DimensionProfile> targets) {
  if (targets.empty()) throw Error(ErrorCode::kInvalidArgument, "no target profiles to adapt to");
  return select_best(term_set(source.list_c1), term_set(source.list_c2), targets);
}

SelectionScore lexicon_select(std::span<const DimensionProfile> profiles,
                              const SubjectivityLexicon& lexicon) {
  if (lexicon.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon is empty");
  if (profiles.empty()) throw Error(ErrorCode::kInvalidArgument, "no profiles to select from");
  auto out = select_best(lexicon.positive, lexicon.negative, profiles);
  if (out.score == 0) {
    out.warnings.push_back("lexicon shares no words with any feature list");
    spdlog::warn("{}", out.warnings.back());
  }
  return out;
}

PolarityMap polarity_from_lexicon(const SelectionScore& score) {
  return score.crossed ? PolarityMap{Polarity::kNegative, Polarity::kPositive}
                       : PolarityMap{Polarity::kPositive, Polarity::kNegative};
}

std::optional<PolarityMap> polarity_from_source(const DimensionProfile& source,
                                                const SelectionScore& score) {
  std::optional<Polarity> c1 = source.list_c1.polarity_label;
  if (!c1 && source.list_c2.polarity_label) c1 = opposite(*source.list_c2.polarity_label);
  if (!c1) return std::nullopt;
  // The target list paired with the source's c1 inherits its label.
  return score.crossed ? PolarityMap{opposite(*c1), *c1} : PolarityMap{*c1, opposite(*c1)};
}

const DimensionProfile* FeedbackSession::profile(int eig_index) const {
  for (const auto& p : profiles) {
    if (p.eig_index == eig_index) return &p;
  }
  return nullptr;
}

std::string now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FeedbackSession new_session(std::string session_id, const Corpus& corpus, SessionSettings settings,
                            std::vector<DimensionProfile> profiles) {
  if (!valid_session_id(session_id)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid session id '" + session_id + "'");
  }
  FeedbackSession s;
  s.session_id = std::move(session_id);
  s.corpus_ref = corpus.content_hash();
  s.settings = settings;
  s.profiles = std::move(profiles);
  s.created = now_iso8601();
  s.updated = s.created;
  return s;
}

SelectionResult cluster_selection(const Corpus& corpus, const EigenBasis& basis,
                                  const FeedbackSession& session, std::span<const int> indices,
                                  const PolarityMap& polarity) {
  if (session.profiles.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "session has no dimension profiles");
  }
  if (session.corpus_ref != corpus.content_hash()) {
    throw Error(ErrorCode::kConflict, "session was built for a different corpus");
  }
  if (indices.empty()) throw Error(ErrorCode::kInvalidArgument, "selection needs an eigenvector index");
  for (int idx : indices) {
    if (idx < 2 || static_cast<std::size_t>(idx) > basis.m() || session.profile(idx) == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "eigenvector index " + std::to_string(idx) + " is not a selectable dimension");
    }
  }
  if (!polarity.valid()) {
    throw Error(ErrorCode::kInvalidArgument, "the two feature lists need distinct polarity labels");
  }

  auto emb = embed(basis, indices);
  auto run = two_means(emb, session.settings.kmeans_runs, session.settings.base_seed);

  SelectionResult result;
  result.partition = run.canonical;
  result.warnings = run.warnings;
  const DimensionProfile& first = *session.profile(indices.front());
  std::array<std::size_t, 2> top_votes{0, 0};
  for (const auto& id : first.unambiguous_top) {
    if (auto pos = corpus.find(id)) ++top_votes[result.partition.assign[*pos] == 0 ? 0 : 1];
  }
  const int c1_cluster = top_votes[1] > top_votes[0] ? 1 : 0;
  result.cluster_polarity[c1_cluster] = polarity.c1;
  result.cluster_polarity[1 - c1_cluster] = polarity.c2;
  result.cluster_sizes = {result.partition.cluster_size(0), result.partition.cluster_size(1)};
  if (corpus.has_gold_labels()) {
    auto gold = binary_gold(corpus);
    result.metrics = evaluate_run(run, gold);
  }
  return result;
}

void record_selection(FeedbackSession& session, const Corpus& corpus, const EigenBasis& basis,
                      std::vector<int> indices, const PolarityMap& polarity, SelectionSource source,
                      std::string note, std::optional<SelectionScore> score) {
  SelectionAttempt attempt;
  attempt.result = cluster_selection(corpus, basis, session, indices, polarity);
  attempt.indices = std::move(indices);
  attempt.source = source;
  attempt.polarity = polarity;
  attempt.note = std::move(note);
  attempt.score = std::move(score);
  attempt.at = now_iso8601();
  session.history.push_back(std::move(attempt));
  ++session.revision;
  session.updated = session.history.back().at;
}

bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  }) && id != "." && id != "..";
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path SessionStore::path_for(const std::string& session_id) const {
  if (!valid_session_id(session_id)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid session id '" + session_id + "'");
  }
  return dir_ / (session_id + ".json");
}

bool SessionStore::exists(const std::string& session_id) const {
  return valid_session_id(session_id) && std::filesystem::exists(path_for(session_id));
}

FeedbackSession SessionStore::load(const std::string& session_id) const {
  auto path = path_for(session_id);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  try {
    return nlohmann::json::parse(in).get<FeedbackSession>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "session '" + session_id + "': " + e.what());
  }
}

void SessionStore::save(const FeedbackSession& session) const {
  std::filesystem::create_directories(dir_);
  auto path = path_for(session.session_id);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << nlohmann::json(session).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  if (!std::filesystem::exists(dir_)) return ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace dimminer
