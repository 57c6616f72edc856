#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dimminer/error.hpp"
#include "dimminer/http_service.hpp"
#include "dimminer/pipeline.hpp"
#include "dimminer/session_io.hpp"

using namespace dimminer;
using nlohmann::json;

namespace {

struct Options {
  PipelineConfig config;
  std::string data_dir;
  std::string mode = "bow";
  std::string laplacian_kind = "normalized";
  std::optional<std::size_t> irm_k;
  std::string log_level = "warn";

  std::string input;
  std::string lexicon;
  std::string out_dir;
  std::string which = "all";
  std::vector<std::size_t> irm_sweep;
  bool as_json = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string session = "default";
  std::vector<int> eig;
  std::string positive_list = "c1";
  std::string note;
  std::optional<std::uint64_t> expected_revision;
  std::string source_profile;
  bool unambiguous = false;
  bool supervised_cv = false;
  std::size_t folds = 5;
};

PipelineConfig resolve(const Options& o) {
  PipelineConfig c = o.config;
  c.mode = parse_representation(o.mode);
  c.laplacian_kind = parse_laplacian_kind(o.laplacian_kind);
  c.irm_k = o.irm_k;
  c.validate();
  return c;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return in;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

int run_ingest(const Options& o) {
  auto config = resolve(o);
  Workspace ws(o.data_dir);
  auto in = open_input(o.input);
  auto docs = read_documents_jsonl(in);
  std::optional<SubjectivityLexicon> lexicon;
  if (!o.lexicon.empty()) {
    auto lin = open_input(o.lexicon);
    lexicon = load_lexicon(lin);
  }
  auto loaded = build_loaded_corpus(docs, config, lexicon);
  json summary{{"documents", loaded.corpus.size()},
               {"vocabulary", loaded.corpus.vocabulary().size()},
               {"mode", to_string(config.mode)},
               {"df_prune_fraction", config.df_prune_fraction},
               {"corpus_hash", loaded.corpus.content_hash()},
               {"gold_labels", loaded.corpus.has_gold_labels()},
               {"lexicon", lexicon.has_value()}};
  ws.store_corpus(docs, lexicon ? &*lexicon : nullptr, summary);
  print(summary);
  return 0;
}

int run_decompose(const Options& o) {
  auto config = resolve(o);
  Workspace ws(o.data_dir);
  auto loaded = load_workspace_corpus(ws, config);
  EigenCache cache(ws.eigen_dir());
  auto basis = decompose(loaded.corpus, config, &cache);
  const std::size_t k = config.laplacian_kind == LaplacianKind::kInterestedReader ? *config.irm_k : 0;
  auto key = eigen_cache_key(loaded.corpus.content_hash(), config.laplacian_kind, config.m, k);
  std::vector<double> values(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.eigenvalues.size());
  print(json{{"laplacian_kind", to_string(basis.kind)},
             {"m", basis.m()},
             {"eigenvalues", values},
             {"active_documents", basis.n_active()},
             {"isolated_documents", basis.isolated.size()},
             {"cache", cache.path_for(key).string()}});
  return 0;
}

int run_profiles(const Options& o) {
  auto config = resolve(o);
  Workspace ws(o.data_dir);
  auto loaded = load_workspace_corpus(ws, config);
  EigenCache cache(ws.eigen_dir());
  auto basis = decompose(loaded.corpus, config, &cache);
  auto profiles = build_profiles(loaded.corpus, basis, config.profile_options());
  std::filesystem::path dir = o.out_dir.empty() ? ws.profiles_dir() : std::filesystem::path(o.out_dir);
  std::filesystem::create_directories(dir);
  json written = json::array();
  for (const auto& p : profiles) {
    auto path = dir / ("e" + std::to_string(p.eig_index) + ".json");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << json(p).dump(2) << '\n';
    written.push_back({{"eig_index", p.eig_index},
                       {"path", path.string()},
                       {"list_c1", p.list_c1.size()},
                       {"list_c2", p.list_c2.size()},
                       {"warnings", p.warnings}});
  }
  print(json{{"profiles", written}});
  return 0;
}

int run_baselines(const Options& o) {
  auto config = resolve(o);
  Workspace ws(o.data_dir);
  auto loaded = load_workspace_corpus(ws, config);
  EigenCache cache(ws.eigen_dir());
  std::vector<BaselineResult> rows;
  const bool all = o.which == "all";
  if (all || o.which == "second-eig" || o.which == "top-m") {
    auto basis = decompose(loaded.corpus, LaplacianKind::kNormalized, config.m, std::nullopt, &cache);
    if (all || o.which == "second-eig") rows.push_back(second_eig_baseline(loaded.corpus, basis, config));
    if (all || o.which == "top-m") rows.push_back(top_m_baseline(loaded.corpus, basis, config));
  }
  if (all || o.which == "irm") {
    if (config.irm_k && o.irm_sweep.empty()) {
      rows.push_back(irm_baseline(loaded.corpus, *config.irm_k, config, &cache));
    } else {
      const auto& ks = o.irm_sweep.empty() ? kDefaultIrmSweep : o.irm_sweep;
      for (auto& r : irm_sweep(loaded.corpus, ks, config, &cache)) rows.push_back(std::move(r));
    }
  }
  if (o.as_json) {
    json out = json::array();
    for (const auto& r : rows) out.push_back(baseline_json(r));
    print(json{{"baselines", out}});
  } else {
    std::cout << baseline_table(rows);
  }
  return 0;
}

SessionService open_service(const Options& o, const PipelineConfig& config) {
  Workspace ws(o.data_dir);
  auto loaded = load_workspace_corpus(ws, config);
  if (!o.lexicon.empty()) {
    auto in = open_input(o.lexicon);
    loaded.lexicon = load_lexicon(in);
  }
  EigenCache cache(ws.eigen_dir());
  auto basis = decompose(loaded.corpus, config, &cache);
  return SessionService(std::move(loaded), std::move(basis), config, ws.sessions_dir());
}

int run_select(const Options& o) {
  auto config = resolve(o);
  auto service = open_service(o, config);
  service.open_or_create(o.session);
  if (o.positive_list != "c1" && o.positive_list != "c2") {
    throw Error(ErrorCode::kInvalidArgument, "positive-list must be c1 or c2");
  }
  PolarityMap polarity = o.positive_list == "c1" ? PolarityMap{Polarity::kPositive, Polarity::kNegative}
                                                 : PolarityMap{Polarity::kNegative, Polarity::kPositive};
  service.select(o.session, o.eig, polarity, SelectionSource::kHuman, o.note, o.expected_revision);
  auto r = service.result(o.session);
  r.erase("documents");
  print(r);
  return 0;
}

int run_lexicon_select(const Options& o) {
  auto config = resolve(o);
  auto service = open_service(o, config);
  service.open_or_create(o.session);
  service.lexicon_select(o.session, o.note, o.expected_revision);
  auto r = service.result(o.session);
  r.erase("documents");
  print(r);
  return 0;
}

int run_adapt(const Options& o) {
  auto config = resolve(o);
  auto service = open_service(o, config);
  service.open_or_create(o.session);
  auto in = open_input(o.source_profile);
  DimensionProfile source;
  try {
    source = json::parse(in).get<DimensionProfile>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, o.source_profile + ": " + e.what());
  }
  service.adapt(o.session, source, o.note, o.expected_revision);
  auto r = service.result(o.session);
  r.erase("documents");
  print(r);
  return 0;
}

int run_eval(const Options& o) {
  auto config = resolve(o);
  Workspace ws(o.data_dir);
  if (o.supervised_cv) {
    auto loaded = load_workspace_corpus(ws, config);
    auto cv = supervised_cv(loaded.corpus, o.folds, config.c_param, config.base_seed);
    if (o.as_json) {
      print(json{{"mean_accuracy_percent", cv.mean_accuracy_percent}, {"per_fold_accuracy", cv.per_fold_accuracy}});
    } else {
      MetricRow row{"supervised-cv", {}};
      row.report.accuracy_percent = cv.mean_accuracy_percent;
      row.report.ari = std::numeric_limits<double>::quiet_NaN();
      row.report.runs_aggregated = o.folds;
      std::vector<MetricRow> rows{row};
      std::cout << format_metric_table(rows);
    }
    return 0;
  }
  auto service = open_service(o, config);
  auto s = service.get(o.session);
  const auto* cur = s.current();
  if (cur == nullptr) throw Error(ErrorCode::kNotFound, "session '" + o.session + "' has no selection yet");
  const auto& corpus = service.corpus();
  auto gold = binary_gold(corpus);
  auto run = two_means(embed(service.basis(), cur->indices), s.settings.kmeans_runs, s.settings.base_seed);
  std::vector<MetricRow> rows{{"full", evaluate_run(run, gold)}};
  if (o.unambiguous) {
    const auto* p = s.profile(cur->indices.front());
    std::vector<std::size_t> subset;
    for (const auto* ids : {&p->unambiguous_top, &p->unambiguous_bottom}) {
      for (const auto& id : *ids) {
        if (auto pos = corpus.find(id)) subset.push_back(*pos);
      }
    }
    auto report = evaluate_run(run, gold, subset);
    std::vector<std::string> subset_ids;
    for (auto pos : subset) subset_ids.push_back(corpus.document(pos).id);
    report.subset = subset_ids;
    rows.push_back({"unambiguous", report});
  }
  if (o.as_json) {
    json out = json::array();
    for (const auto& r : rows) out.push_back({{"name", r.name}, {"report", r.report}});
    print(json{{"session_id", s.session_id}, {"indices", cur->indices}, {"reports", out}});
  } else {
    std::cout << format_metric_table(rows);
  }
  return 0;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

int run_serve(const Options& o) {
  auto config = resolve(o);
  auto service = open_service(o, config);
  httplib::Server server;
  std::optional<std::filesystem::path> static_dir;
  if (!o.static_dir.empty()) static_dir = o.static_dir;
  mount_routes(server, service, static_dir);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  int port = o.port;
  if (port == 0) {
    port = server.bind_to_any_port(o.host);
  } else if (!server.bind_to_port(o.host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + o.host + ":" + std::to_string(o.port));
  }
  // One line on stdout so callers can find the port.
  std::cout << json{{"listening", {{"host", o.host}, {"port", port}}}}.dump() << std::endl;
  server.listen_after_bind();
  return 0;
}

void fail(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.data_dir = default_data_dir().string();

  CLI::App app{"Spectral clustering along user-selected dimensions."};
  app.set_config("--config", "", "TOML or INI file of option values");
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--data-dir", o.data_dir, "Corpus, cache, and session root")->capture_default_str();
  app.add_option("--mode", o.mode, "Representation: bow, boaw, bosw")
      ->check(CLI::IsMember({"bow", "boaw", "bosw"}))
      ->capture_default_str();
  app.add_option("--df-prune-fraction", o.config.df_prune_fraction)->capture_default_str();
  app.add_option("--m", o.config.m, "Eigenvectors to compute")->capture_default_str();
  app.add_option("--unambiguous-fraction", o.config.unambiguous_fraction)->capture_default_str();
  app.add_option("--f-count,--f", o.config.f_count, "Features per list")->capture_default_str();
  app.add_option("--c-param", o.config.c_param)->capture_default_str();
  app.add_option("--kmeans-runs", o.config.kmeans_runs)->capture_default_str();
  app.add_option("--base-seed", o.config.base_seed)->capture_default_str();
  app.add_option("--laplacian-kind", o.laplacian_kind, "normalized or irm")
      ->check(CLI::IsMember({"normalized", "irm"}))
      ->capture_default_str();
  app.add_option("--irm-k", o.irm_k, "Neighbours kept by the irm laplacian");
  app.add_option("--log-level", o.log_level)->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  int (*action)(const Options&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&action, fn] { action = fn; });
    return s;
  };

  auto* ingest = sub("ingest", "Build and cache a corpus from JSONL documents", run_ingest);
  ingest->add_option("--input", o.input, "Documents, one JSON object per line")->required();
  ingest->add_option("--lexicon", o.lexicon, "Subjectivity lexicon, term<TAB>polarity");

  sub("decompose", "Compute and cache the top-m eigenpairs", run_decompose);

  auto* profiles = sub("profiles", "Write one dimension profile per eigenvector 2..m", run_profiles);
  profiles->add_option("--out", o.out_dir, "Output directory");

  auto* baselines = sub("baselines", "Second-eigenvector, top-m, and irm clusterings", run_baselines);
  baselines->add_option("--which", o.which)
      ->check(CLI::IsMember({"all", "second-eig", "top-m", "irm"}))
      ->capture_default_str();
  baselines->add_option("--irm-sweep", o.irm_sweep, "k values for the irm sweep")->delimiter(',');
  baselines->add_flag("--json", o.as_json);

  auto* serve = sub("serve", "Serve the session API over HTTP", run_serve);
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port, "0 picks a free port")->capture_default_str();
  serve->add_option("--static-dir", o.static_dir, "Directory served under /ui");
  serve->add_option("--lexicon", o.lexicon, "Lexicon for lexicon-selection");

  auto session_opts = [&](CLI::App* s) {
    s->add_option("--session", o.session)->capture_default_str();
    s->add_option("--note", o.note);
    s->add_option("--expected-revision", o.expected_revision);
  };

  auto* select = sub("select", "Cluster along chosen eigenvectors", run_select);
  session_opts(select);
  select->add_option("--eig", o.eig, "Eigenvector indices, in order")->required()->delimiter(',');
  select->add_option("--positive-list", o.positive_list, "Which list of the first index is POSITIVE")
      ->check(CLI::IsMember({"c1", "c2"}))
      ->capture_default_str();

  auto* lexsel = sub("lexicon-select", "Pick the eigenvector closest to the lexicon", run_lexicon_select);
  session_opts(lexsel);
  lexsel->add_option("--lexicon", o.lexicon, "Lexicon overriding the ingested one");

  auto* adapt = sub("adapt", "Pick the eigenvector closest to a source-domain profile", run_adapt);
  session_opts(adapt);
  adapt->add_option("--source-profile", o.source_profile, "Profile JSON from another corpus")->required();

  auto* eval = sub("eval", "Metrics of a session's selection or a supervised baseline", run_eval);
  eval->add_option("--session", o.session)->capture_default_str();
  eval->add_flag("--unambiguous", o.unambiguous, "Also report the unambiguous documents");
  eval->add_flag("--supervised-cv", o.supervised_cv, "Cross-validated margin classifier");
  eval->add_option("--folds", o.folds)->capture_default_str();
  eval->add_flag("--json", o.as_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("dimminer");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    return action(o);
  } catch (const Error& e) {
    fail(to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    fail("internal", e.what());
  }
  return 1;
}
