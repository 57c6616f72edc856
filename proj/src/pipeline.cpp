#include "dimminer/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "dimminer/error.hpp"
#include "dimminer/session_io.hpp"

namespace dimminer {

using nlohmann::json;

ProfileOptions PipelineConfig::profile_options() const {
  ProfileOptions o;
  o.f_count = f_count;
  o.c_param = c_param;
  o.unambiguous_fraction = unambiguous_fraction;
  return o;
}

SessionSettings PipelineConfig::session_settings() const {
  SessionSettings s;
  s.f_count = f_count;
  s.c_param = c_param;
  s.unambiguous_fraction = unambiguous_fraction;
  s.kmeans_runs = kmeans_runs;
  s.base_seed = base_seed;
  return s;
}

void PipelineConfig::validate() const {
  if (df_prune_fraction < 0.0 || df_prune_fraction >= 1.0) {
    throw Error(ErrorCode::kConfig, "df-prune-fraction must lie in [0, 1)");
  }
  if (m < 2) throw Error(ErrorCode::kConfig, "m must be at least 2");
  if (unambiguous_fraction <= 0.0 || unambiguous_fraction > 1.0) {
    throw Error(ErrorCode::kConfig, "unambiguous-fraction must lie in (0, 1]");
  }
  if (f_count == 0) throw Error(ErrorCode::kConfig, "f-count must be positive");
  if (c_param <= 0.0) throw Error(ErrorCode::kConfig, "c-param must be positive");
  if (kmeans_runs == 0) throw Error(ErrorCode::kConfig, "kmeans-runs must be positive");
  if (laplacian_kind == LaplacianKind::kInterestedReader && !irm_k) {
    throw Error(ErrorCode::kConfig, "the irm laplacian needs irm-k");
  }
  if (irm_k && *irm_k == 0) throw Error(ErrorCode::kConfig, "irm-k must be positive");
}

void to_json(json& j, const PipelineConfig& c) {
  j = json{{"mode", to_string(c.mode)},
           {"df_prune_fraction", c.df_prune_fraction},
           {"m", c.m},
           {"unambiguous_fraction", c.unambiguous_fraction},
           {"f_count", c.f_count},
           {"c_param", c.c_param},
           {"kmeans_runs", c.kmeans_runs},
           {"base_seed", c.base_seed},
           {"laplacian_kind", to_string(c.laplacian_kind)},
           {"irm_k", c.irm_k ? json(*c.irm_k) : json(nullptr)}};
}

void from_json(const json& j, PipelineConfig& c) {
  PipelineConfig d;
  c.mode = parse_representation(j.value("mode", std::string(to_string(d.mode))));
  c.df_prune_fraction = j.value("df_prune_fraction", d.df_prune_fraction);
  c.m = j.value("m", d.m);
  c.unambiguous_fraction = j.value("unambiguous_fraction", d.unambiguous_fraction);
  c.f_count = j.value("f_count", d.f_count);
  c.c_param = j.value("c_param", d.c_param);
  c.kmeans_runs = j.value("kmeans_runs", d.kmeans_runs);
  c.base_seed = j.value("base_seed", d.base_seed);
  c.laplacian_kind =
      parse_laplacian_kind(j.value("laplacian_kind", std::string(to_string(d.laplacian_kind))));
  if (j.contains("irm_k") && !j["irm_k"].is_null()) {
    c.irm_k = j["irm_k"].get<std::size_t>();
  } else {
    c.irm_k.reset();
  }
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DIMMINER_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "dimminer-data";
}

Workspace::Workspace(std::filesystem::path root) : root_(std::move(root)) {}

bool Workspace::has_corpus() const { return std::filesystem::exists(documents_path()); }

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_documents_jsonl(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& d : docs) {
    json j{{"id", d.id}, {"text", d.text}};
    if (d.gold_label) j["label"] = *d.gold_label;
    if (d.domain_tag) j["domain"] = *d.domain_tag;
    out << j.dump() << '\n';
  }
}

void write_lexicon(std::ostream& out, const SubjectivityLexicon& lexicon) {
  for (const auto& t : lexicon.positive) out << t << "\tpositive\n";
  for (const auto& t : lexicon.negative) out << t << "\tnegative\n";
}

void Workspace::store_corpus(const std::vector<RawDocument>& docs, const SubjectivityLexicon* lexicon,
                             const json& manifest) const {
  std::ostringstream d;
  write_documents_jsonl(d, docs);
  write_atomic(documents_path(), d.str());
  if (lexicon != nullptr) {
    std::ostringstream l;
    write_lexicon(l, *lexicon);
    write_atomic(lexicon_path(), l.str());
  } else {
    std::filesystem::remove(lexicon_path());
  }
  write_atomic(manifest_path(), manifest.dump(2) + "\n");
}

std::vector<RawDocument> Workspace::load_documents() const {
  std::ifstream in(documents_path());
  if (!in) {
    throw Error(ErrorCode::kNotFound, "no corpus in " + root_.string() + "; run ingest first");
  }
  return read_documents_jsonl(in);
}

std::optional<SubjectivityLexicon> Workspace::load_lexicon() const {
  std::ifstream in(lexicon_path());
  if (!in) return std::nullopt;
  return dimminer::load_lexicon(in);
}

LoadedCorpus build_loaded_corpus(const std::vector<RawDocument>& docs, const PipelineConfig& config,
                                 std::optional<SubjectivityLexicon> lexicon) {
  auto corpus = build_corpus(docs, config.mode, lexicon ? &*lexicon : nullptr, config.df_prune_fraction);
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return LoadedCorpus{std::move(corpus), std::move(texts), std::move(lexicon)};
}

LoadedCorpus load_workspace_corpus(const Workspace& ws, const PipelineConfig& config) {
  return build_loaded_corpus(ws.load_documents(), config, ws.load_lexicon());
}

Laplacian build_laplacian(const Corpus& corpus, LaplacianKind kind, std::optional<std::size_t> irm_k) {
  auto g = similarity_matrix(corpus);
  if (kind == LaplacianKind::kNormalized) return normalized_laplacian(g);
  if (!irm_k) throw Error(ErrorCode::kConfig, "the irm laplacian needs irm-k");
  return irm_laplacian(g, *irm_k);
}

EigenBasis decompose(const Corpus& corpus, LaplacianKind kind, std::size_t m,
                     std::optional<std::size_t> irm_k, const EigenCache* cache) {
  const std::size_t k = kind == LaplacianKind::kInterestedReader ? irm_k.value_or(0) : 0;
  const auto key = eigen_cache_key(corpus.content_hash(), kind, m, k);
  if (cache != nullptr) {
    if (auto hit = cache->load(key)) return *hit;
  }
  auto basis = top_eigenpairs(build_laplacian(corpus, kind, irm_k), m);
  if (cache != nullptr) cache->store(key, basis);
  return basis;
}

EigenBasis decompose(const Corpus& corpus, const PipelineConfig& config, const EigenCache* cache) {
  return decompose(corpus, config.laplacian_kind, config.m, config.irm_k, cache);
}

namespace {

BaselineResult cluster_baseline(std::string name, const Corpus& corpus, const EigenBasis& basis,
                                std::span<const int> indices, const PipelineConfig& config) {
  BaselineResult out;
  out.name = std::move(name);
  out.run = two_means(embed(basis, indices), config.kmeans_runs, config.base_seed);
  if (corpus.has_gold_labels()) out.metrics = evaluate_run(out.run, binary_gold(corpus));
  return out;
}

}  // namespace

BaselineResult second_eig_baseline(const Corpus& corpus, const EigenBasis& basis,
                                   const PipelineConfig& config) {
  const int idx[] = {2};
  return cluster_baseline("second-eig", corpus, basis, idx, config);
}

BaselineResult top_m_baseline(const Corpus& corpus, const EigenBasis& basis,
                              const PipelineConfig& config) {
  std::vector<int> idx;
  for (std::size_t i = 1; i <= basis.m(); ++i) idx.push_back(static_cast<int>(i));
  return cluster_baseline("top-" + std::to_string(basis.m()), corpus, basis, idx, config);
}

BaselineResult irm_baseline(const Corpus& corpus, std::size_t k, const PipelineConfig& config,
                            const EigenCache* cache) {
  auto basis = decompose(corpus, LaplacianKind::kInterestedReader, 2, k, cache);
  const int idx[] = {2};
  return cluster_baseline("irm-k" + std::to_string(k), corpus, basis, idx, config);
}

std::vector<BaselineResult> irm_sweep(const Corpus& corpus, std::span<const std::size_t> ks,
                                      const PipelineConfig& config, const EigenCache* cache) {
  std::vector<BaselineResult> rows;
  for (auto k : ks) {
    if (k >= corpus.size()) continue;
    rows.push_back(irm_baseline(corpus, k, config, cache));
  }
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "no irm k below the corpus size");
  return rows;
}

json baseline_json(const BaselineResult& b) {
  json j{{"name", b.name},
         {"cluster_sizes", {b.run.canonical.cluster_size(0), b.run.canonical.cluster_size(1)}},
         {"runs", b.run.runs},
         {"per_run_sse", b.run.per_run_sse},
         {"canonical_run", b.run.canonical_run}};
  j["metrics"] = b.metrics ? json(*b.metrics) : json(nullptr);
  return j;
}

std::string baseline_table(std::span<const BaselineResult> rows) {
  std::vector<MetricRow> table;
  for (const auto& r : rows) {
    MetricReport rep;
    if (r.metrics) {
      rep = *r.metrics;
    } else {
      rep.accuracy_percent = std::numeric_limits<double>::quiet_NaN();
      rep.ari = std::numeric_limits<double>::quiet_NaN();
      rep.runs_aggregated = r.run.runs;
    }
    table.push_back({r.name, rep});
  }
  return format_metric_table(table);
}

std::string snippet(const std::string& text) {
  std::size_t chars = 0;
  std::size_t i = 0;
  for (; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (chars == kSnippetChars) break;
      ++chars;
    }
  }
  return text.substr(0, i);
}

SessionService::SessionService(LoadedCorpus corpus, EigenBasis basis, PipelineConfig config,
                               std::filesystem::path sessions_dir)
    : loaded_(std::move(corpus)),
      basis_(std::move(basis)),
      config_(std::move(config)),
      store_(std::move(sessions_dir)) {
  if (basis_.n_documents != loaded_.corpus.size()) {
    throw Error(ErrorCode::kConflict, "eigen basis does not belong to the loaded corpus");
  }
}

std::vector<std::string> SessionService::list() const { return store_.list(); }

const std::vector<DimensionProfile>& SessionService::profiles_for(const SessionSettings& settings) {
  std::lock_guard lock(profiles_mutex_);
  auto key = std::make_tuple(settings.f_count, settings.c_param, settings.unambiguous_fraction);
  auto it = profile_cache_.find(key);
  if (it == profile_cache_.end()) {
    ProfileOptions o;
    o.f_count = settings.f_count;
    o.c_param = settings.c_param;
    o.unambiguous_fraction = settings.unambiguous_fraction;
    it = profile_cache_.emplace(key, build_profiles(loaded_.corpus, basis_, o)).first;
  }
  return it->second;
}

std::mutex& SessionService::session_mutex(const std::string& session_id) {
  std::lock_guard lock(registry_mutex_);
  auto& slot = session_mutexes_[session_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void SessionService::check_revision(const FeedbackSession& s,
                                    std::optional<std::uint64_t> expected) const {
  if (expected && *expected != s.revision) {
    throw Error(ErrorCode::kConflict, "session '" + s.session_id + "' is at revision " +
                                          std::to_string(s.revision) + ", not " +
                                          std::to_string(*expected));
  }
}

FeedbackSession SessionService::create(std::optional<std::string> session_id,
                                       std::optional<SessionSettings> settings) {
  SessionSettings s = settings.value_or(config_.session_settings());
  if (s.kmeans_runs == 0 || s.f_count == 0 || s.c_param <= 0.0 || s.unambiguous_fraction <= 0.0 ||
      s.unambiguous_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid session settings");
  }
  std::string id;
  if (session_id) {
    id = *session_id;
  } else {
    std::lock_guard lock(registry_mutex_);
    for (std::size_t n = 1;; ++n) {
      id = "session-" + std::to_string(n);
      if (!store_.exists(id) && session_mutexes_.count(id) == 0) break;
    }
  }
  if (!valid_session_id(id)) throw Error(ErrorCode::kInvalidArgument, "invalid session id '" + id + "'");
  std::lock_guard lock(session_mutex(id));
  if (store_.exists(id)) throw Error(ErrorCode::kConflict, "session '" + id + "' already exists");
  auto session = new_session(id, loaded_.corpus, s, profiles_for(s));
  store_.save(session);
  return session;
}

FeedbackSession SessionService::open_or_create(const std::string& session_id) {
  if (store_.exists(session_id)) return store_.load(session_id);
  return create(session_id);
}

FeedbackSession SessionService::get(const std::string& session_id) const {
  return store_.load(session_id);
}

json SessionService::dimensions(const std::string& session_id) const {
  auto s = get(session_id);
  json dims = json::array();
  for (const auto& p : s.profiles) {
    json d = p;
    d["unambiguous_counts"] = {{"top", p.unambiguous_top.size()}, {"bottom", p.unambiguous_bottom.size()}};
    if (p.eig_index >= 1 && static_cast<std::size_t>(p.eig_index) <= basis_.m()) {
      d["eigenvalue"] = basis_.eigenvalues(p.eig_index - 1);
    }
    dims.push_back(std::move(d));
  }
  return json{{"session_id", s.session_id},
              {"revision", s.revision},
              {"f_count", s.settings.f_count},
              {"dimensions", std::move(dims)}};
}

json SessionService::preview(const std::string& session_id, const std::vector<int>& indices,
                             const PolarityMap& polarity) const {
  auto s = get(session_id);
  auto r = cluster_selection(loaded_.corpus, basis_, s, indices, polarity);
  json clusters = json::array();
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < r.partition.size(); ++i) {
      if (r.partition.assign[i] == c) members.push_back(i);
    }
    json snippets = json::array();
    const std::size_t take = std::min(kSnippetsPerCluster, members.size());
    for (std::size_t k = 0; k < take; ++k) {
      auto doc = members[k * members.size() / take];
      snippets.push_back({{"id", loaded_.corpus.document(doc).id}, {"text", snippet(loaded_.texts[doc])}});
    }
    clusters.push_back({{"cluster", c},
                        {"size", members.size()},
                        {"polarity", to_string(r.cluster_polarity[c])},
                        {"snippets", std::move(snippets)}});
  }
  return json{{"session_id", s.session_id},
              {"revision", s.revision},
              {"indices", indices},
              {"polarity_map", polarity},
              {"cluster_sizes", r.cluster_sizes},
              {"clusters", std::move(clusters)},
              {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)},
              {"warnings", r.warnings}};
}

json SessionService::result(const std::string& session_id) const {
  auto s = get(session_id);
  const auto* cur = s.current();
  if (cur == nullptr) {
    throw Error(ErrorCode::kNotFound, "session '" + session_id + "' has no selection yet");
  }
  json docs = json::array();
  for (std::size_t i = 0; i < cur->result.partition.size(); ++i) {
    int c = cur->result.partition.assign[i];
    docs.push_back({{"id", loaded_.corpus.document(i).id},
                    {"cluster", c},
                    {"polarity", to_string(cur->result.cluster_polarity[c])}});
  }
  json out{{"session_id", s.session_id},
           {"revision", s.revision},
           {"selection", {{"indices", cur->indices}, {"source", to_string(cur->source)}}},
           {"polarity_map", cur->polarity},
           {"cluster_sizes", cur->result.cluster_sizes},
           {"cluster_polarity",
            {to_string(cur->result.cluster_polarity[0]), to_string(cur->result.cluster_polarity[1])}},
           {"metrics", cur->result.metrics ? json(*cur->result.metrics) : json(nullptr)},
           {"warnings", cur->result.warnings},
           {"documents", std::move(docs)}};
  if (cur->score) out["score"] = *cur->score;
  return out;
}

FeedbackSession SessionService::select(const std::string& session_id, std::vector<int> indices,
                                       const PolarityMap& polarity, SelectionSource source,
                                       std::string note, std::optional<std::uint64_t> expected_revision) {
  std::lock_guard lock(session_mutex(session_id));
  auto s = store_.load(session_id);
  check_revision(s, expected_revision);
  record_selection(s, loaded_.corpus, basis_, std::move(indices), polarity, source, std::move(note));
  store_.save(s);
  return s;
}

FeedbackSession SessionService::lexicon_select(const std::string& session_id, std::string note,
                                               std::optional<std::uint64_t> expected_revision) {
  if (!loaded_.lexicon || loaded_.lexicon->empty()) {
    throw Error(ErrorCode::kConfig, "no lexicon was ingested with the corpus");
  }
  std::lock_guard lock(session_mutex(session_id));
  auto s = store_.load(session_id);
  check_revision(s, expected_revision);
  auto score = dimminer::lexicon_select(s.profiles, *loaded_.lexicon);
  record_selection(s, loaded_.corpus, basis_, {score.eig_index}, polarity_from_lexicon(score),
                   SelectionSource::kLexicon, std::move(note), score);
  store_.save(s);
  return s;
}

FeedbackSession SessionService::adapt(const std::string& session_id, const DimensionProfile& source,
                                      std::string note, std::optional<std::uint64_t> expected_revision) {
  std::lock_guard lock(session_mutex(session_id));
  auto s = store_.load(session_id);
  check_revision(s, expected_revision);
  auto score = adapt_select(source, s.profiles);
  auto polarity = polarity_from_source(source, score).value_or(PolarityMap{});
  record_selection(s, loaded_.corpus, basis_, {score.eig_index}, polarity, SelectionSource::kAdapted,
                   std::move(note), score);
  store_.save(s);
  return s;
}

}  // namespace dimminer
