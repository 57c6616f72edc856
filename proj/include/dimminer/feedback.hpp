#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dimminer/cluster.hpp"
#include "dimminer/corpus.hpp"
#include "dimminer/dimension.hpp"
#include "dimminer/eval.hpp"
#include "dimminer/spectral.hpp"

namespace dimminer {

enum class SelectionSource { kHuman, kLexicon, kAdapted };

std::string_view to_string(SelectionSource s);
SelectionSource parse_selection_source(std::string_view name);

using TermSet = std::set<std::string>;

struct PairingScore {
  std::size_t score = 0;
  // True when the best mapping pairs a's first list with b's second list.
  bool crossed = false;
};

// max(|A1 n B1| + |A2 n B2|, |A1 n B2| + |A2 n B1|); the straight pairing wins ties.
PairingScore eig_similarity(const TermSet& a1, const TermSet& a2, const TermSet& b1,
                            const TermSet& b2);
PairingScore eig_similarity(const DimensionProfile& a, const DimensionProfile& b);

struct SelectionScore {
  int eig_index = 0;
  std::size_t score = 0;
  std::size_t second_best_score = 0;
  std::size_t gap = 0;
  bool crossed = false;
  std::vector<std::pair<int, std::size_t>> candidates;  // (eig_index, score) in input order
  std::vector<std::string> warnings;
};

// Highest-overlap target profile; ties go to the smaller eigenvector index.
SelectionScore adapt_select(const DimensionProfile& source, std::span<const DimensionProfile> targets);

// Same rule with the lexicon's positive/negative words as the source lists.
SelectionScore lexicon_select(std::span<const DimensionProfile> profiles,
                              const SubjectivityLexicon& lexicon);

// Labels for the two feature lists of the first selected profile.
struct PolarityMap {
  Polarity c1 = Polarity::kPositive;
  Polarity c2 = Polarity::kNegative;

  bool valid() const { return c1 != c2; }
  bool operator==(const PolarityMap&) const = default;
};

// The list matched to the lexicon's positive words is POSITIVE.
PolarityMap polarity_from_lexicon(const SelectionScore& score);
// Carries the source's list labels across the winning pairing, if it has any.
std::optional<PolarityMap> polarity_from_source(const DimensionProfile& source,
                                                const SelectionScore& score);

struct SessionSettings {
  std::size_t f_count = 100;
  double c_param = 1.0;
  double unambiguous_fraction = 0.25;
  std::size_t kmeans_runs = 10;
  std::uint64_t base_seed = 0;

  bool operator==(const SessionSettings&) const = default;
};

struct SelectionResult {
  Partition partition;  // canonical (minimum SSE) partition
  std::array<Polarity, 2> cluster_polarity{Polarity::kPositive, Polarity::kNegative};
  std::array<std::size_t, 2> cluster_sizes{0, 0};
  std::optional<MetricReport> metrics;  // mean over runs, when gold labels exist
  std::vector<std::string> warnings;
};

struct SelectionAttempt {
  std::vector<int> indices;
  SelectionSource source = SelectionSource::kHuman;
  PolarityMap polarity;
  std::string note;
  std::optional<SelectionScore> score;
  SelectionResult result;
  std::string at;
};

struct FeedbackSession {
  std::string session_id;
  std::string corpus_ref;
  SessionSettings settings;
  std::vector<DimensionProfile> profiles;
  std::vector<SelectionAttempt> history;  // every selection; the last one is canonical
  std::uint64_t revision = 0;
  std::string created;
  std::string updated;

  const SelectionAttempt* current() const { return history.empty() ? nullptr : &history.back(); }
  const DimensionProfile* profile(int eig_index) const;
};

FeedbackSession new_session(std::string session_id, const Corpus& corpus, SessionSettings settings,
                            std::vector<DimensionProfile> profiles);

// Clusters every document along the selected eigenvectors and maps clusters
// to polarities through the first profile's top documents. Pure: used for
// previews and by record_selection.
SelectionResult cluster_selection(const Corpus& corpus, const EigenBasis& basis,
                                  const FeedbackSession& session, std::span<const int> indices,
                                  const PolarityMap& polarity);

// Validates, clusters, and appends a new attempt; bumps the revision.
void record_selection(FeedbackSession& session, const Corpus& corpus, const EigenBasis& basis,
                      std::vector<int> indices, const PolarityMap& polarity, SelectionSource source,
                      std::string note = {}, std::optional<SelectionScore> score = std::nullopt);

std::string now_iso8601();

// One JSON file per session, named by its id.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  bool exists(const std::string& session_id) const;
  FeedbackSession load(const std::string& session_id) const;
  void save(const FeedbackSession& session) const;
  std::vector<std::string> list() const;

 private:
  std::filesystem::path path_for(const std::string& session_id) const;
  std::filesystem::path dir_;
};

bool valid_session_id(std::string_view id);

}  // namespace dimminer
