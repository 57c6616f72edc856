#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dimminer/cluster.hpp"
#include "dimminer/corpus.hpp"
#include "dimminer/dimension.hpp"
#include "dimminer/eigen_cache.hpp"
#include "dimminer/eval.hpp"
#include "dimminer/feedback.hpp"
#include "dimminer/spectral.hpp"

namespace dimminer {

struct PipelineConfig {
  Representation mode = Representation::kBow;
  double df_prune_fraction = 0.015;
  std::size_t m = 5;
  double unambiguous_fraction = 0.25;
  std::size_t f_count = 100;
  double c_param = 1.0;
  std::size_t kmeans_runs = 10;
  std::uint64_t base_seed = 0;
  LaplacianKind laplacian_kind = LaplacianKind::kNormalized;
  std::optional<std::size_t> irm_k;

  ProfileOptions profile_options() const;
  SessionSettings session_settings() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

// DIMMINER_DATA_DIR, else ./dimminer-data.
std::filesystem::path default_data_dir();

// Layout of the data directory: one ingested corpus, its eigen cache, and
// the session store.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path documents_path() const { return root_ / "corpus" / "documents.jsonl"; }
  std::filesystem::path lexicon_path() const { return root_ / "corpus" / "lexicon.tsv"; }
  std::filesystem::path manifest_path() const { return root_ / "corpus" / "manifest.json"; }
  std::filesystem::path eigen_dir() const { return root_ / "eigen"; }
  std::filesystem::path sessions_dir() const { return root_ / "sessions"; }
  std::filesystem::path profiles_dir() const { return root_ / "profiles"; }

  bool has_corpus() const;
  // Copies documents (and the lexicon, if given) into the workspace.
  void store_corpus(const std::vector<RawDocument>& docs, const SubjectivityLexicon* lexicon,
                    const nlohmann::json& manifest) const;
  std::vector<RawDocument> load_documents() const;
  std::optional<SubjectivityLexicon> load_lexicon() const;

 private:
  std::filesystem::path root_;
};

void write_documents_jsonl(std::ostream& out, std::span<const RawDocument> docs);
void write_lexicon(std::ostream& out, const SubjectivityLexicon& lexicon);

// Corpus plus the raw texts used for preview snippets.
struct LoadedCorpus {
  Corpus corpus;
  std::vector<std::string> texts;
  std::optional<SubjectivityLexicon> lexicon;
};

LoadedCorpus build_loaded_corpus(const std::vector<RawDocument>& docs, const PipelineConfig& config,
                                 std::optional<SubjectivityLexicon> lexicon);
LoadedCorpus load_workspace_corpus(const Workspace& ws, const PipelineConfig& config);

Laplacian build_laplacian(const Corpus& corpus, LaplacianKind kind, std::optional<std::size_t> irm_k);

// Cached by (corpus hash, kind, m, k) when a cache is given.
EigenBasis decompose(const Corpus& corpus, LaplacianKind kind, std::size_t m,
                     std::optional<std::size_t> irm_k, const EigenCache* cache);
EigenBasis decompose(const Corpus& corpus, const PipelineConfig& config, const EigenCache* cache);

struct BaselineResult {
  std::string name;
  ClusterRun run;
  std::optional<MetricReport> metrics;
};

inline const std::vector<std::size_t> kDefaultIrmSweep{10, 25, 50, 100, 250, 500};

BaselineResult second_eig_baseline(const Corpus& corpus, const EigenBasis& basis,
                                   const PipelineConfig& config);
// Every one of e_1..e_m, rows normalized.
BaselineResult top_m_baseline(const Corpus& corpus, const EigenBasis& basis,
                              const PipelineConfig& config);
BaselineResult irm_baseline(const Corpus& corpus, std::size_t k, const PipelineConfig& config,
                            const EigenCache* cache);
// One row per k below the corpus size.
std::vector<BaselineResult> irm_sweep(const Corpus& corpus, std::span<const std::size_t> ks,
                                      const PipelineConfig& config, const EigenCache* cache);

nlohmann::json baseline_json(const BaselineResult& b);
std::string baseline_table(std::span<const BaselineResult> rows);

// Session operations shared by the CLI and the HTTP service. Mutations on one
// session are serialized; a stale expected revision is a conflict.
class SessionService {
 public:
  SessionService(LoadedCorpus corpus, EigenBasis basis, PipelineConfig config,
                 std::filesystem::path sessions_dir);

  const Corpus& corpus() const { return loaded_.corpus; }
  const EigenBasis& basis() const { return basis_; }
  const PipelineConfig& config() const { return config_; }

  std::vector<std::string> list() const;
  FeedbackSession create(std::optional<std::string> session_id,
                         std::optional<SessionSettings> settings = std::nullopt);
  // Loads the session, creating it with default settings when absent.
  FeedbackSession open_or_create(const std::string& session_id);
  FeedbackSession get(const std::string& session_id) const;

  nlohmann::json dimensions(const std::string& session_id) const;
  nlohmann::json preview(const std::string& session_id, const std::vector<int>& indices,
                         const PolarityMap& polarity) const;
  nlohmann::json result(const std::string& session_id) const;

  FeedbackSession select(const std::string& session_id, std::vector<int> indices,
                         const PolarityMap& polarity, SelectionSource source, std::string note,
                         std::optional<std::uint64_t> expected_revision);
  FeedbackSession lexicon_select(const std::string& session_id, std::string note,
                                 std::optional<std::uint64_t> expected_revision);
  FeedbackSession adapt(const std::string& session_id, const DimensionProfile& source,
                        std::string note, std::optional<std::uint64_t> expected_revision);

  const std::vector<DimensionProfile>& profiles_for(const SessionSettings& settings);

 private:
  std::mutex& session_mutex(const std::string& session_id);
  void check_revision(const FeedbackSession& s, std::optional<std::uint64_t> expected) const;

  LoadedCorpus loaded_;
  EigenBasis basis_;
  PipelineConfig config_;
  SessionStore store_;

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> session_mutexes_;
  std::mutex profiles_mutex_;
  std::map<std::tuple<std::size_t, double, double>, std::vector<DimensionProfile>> profile_cache_;
};

inline constexpr std::size_t kSnippetChars = 300;
inline constexpr std::size_t kSnippetsPerCluster = 10;

std::string snippet(const std::string& text);

}  // namespace dimminer
