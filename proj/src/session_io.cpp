#include "dimminer/session_io.hpp"

#include "dimminer/error.hpp"

namespace dimminer {

using nlohmann::json;

void to_json(json& j, const FeatureList& list) {
  j = json::array();
  for (const auto& e : list.entries) j.push_back(json::array({e.term, e.weight}));
}

void from_json(const json& j, FeatureList& list) {
  list.entries.clear();
  for (const auto& row : j) {
    if (row.is_array()) {
      list.entries.push_back({row.at(0).get<std::string>(), row.size() > 1 ? row.at(1).get<double>() : 0.0});
    } else {
      list.entries.push_back({row.get<std::string>(), 0.0});
    }
  }
}

void to_json(json& j, const DimensionProfile& p) {
  j = json{{"eig_index", p.eig_index},
           {"top_ids", p.unambiguous_top},
           {"bottom_ids", p.unambiguous_bottom},
           {"list_c1", p.list_c1},
           {"list_c2", p.list_c2}};
  if (p.list_c1.polarity_label) j["list_c1_polarity"] = to_string(*p.list_c1.polarity_label);
  if (p.list_c2.polarity_label) j["list_c2_polarity"] = to_string(*p.list_c2.polarity_label);
  j["training_accuracy"] = p.training_accuracy;
  if (!p.warnings.empty()) j["warnings"] = p.warnings;
}

void from_json(const json& j, DimensionProfile& p) {
  p.eig_index = j.at("eig_index").get<int>();
  p.unambiguous_top = j.value("top_ids", std::vector<std::string>{});
  p.unambiguous_bottom = j.value("bottom_ids", std::vector<std::string>{});
  j.at("list_c1").get_to(p.list_c1);
  j.at("list_c2").get_to(p.list_c2);
  if (j.contains("list_c1_polarity")) {
    p.list_c1.polarity_label = parse_polarity(j["list_c1_polarity"].get<std::string>());
  }
  if (j.contains("list_c2_polarity")) {
    p.list_c2.polarity_label = parse_polarity(j["list_c2_polarity"].get<std::string>());
  }
  p.training_accuracy = j.value("training_accuracy", 0.0);
  p.model.reset();
  p.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const MetricReport& r) {
  j = json{{"accuracy_percent", r.accuracy_percent},
           {"ari", r.ari},
           {"runs_aggregated", r.runs_aggregated},
           {"per_run_accuracy", r.per_run_accuracy},
           {"per_run_ari", r.per_run_ari}};
  if (r.subset) j["subset"] = *r.subset;
}

void from_json(const json& j, MetricReport& r) {
  r.accuracy_percent = j.at("accuracy_percent").get<double>();
  r.ari = j.at("ari").get<double>();
  r.runs_aggregated = j.value("runs_aggregated", std::size_t{1});
  r.per_run_accuracy = j.value("per_run_accuracy", std::vector<double>{});
  r.per_run_ari = j.value("per_run_ari", std::vector<double>{});
  if (j.contains("subset")) r.subset = j["subset"].get<std::vector<std::string>>();
}

void to_json(json& j, const SelectionScore& s) {
  json candidates = json::array();
  for (const auto& [idx, score] : s.candidates) {
    candidates.push_back({{"eig_index", idx}, {"score", score}});
  }
  j = json{{"eig_index", s.eig_index},
           {"score", s.score},
           {"second_best_score", s.second_best_score},
           {"gap", s.gap},
           {"crossed", s.crossed},
           {"candidates", candidates}};
  if (!s.warnings.empty()) j["warnings"] = s.warnings;
}

void from_json(const json& j, SelectionScore& s) {
  s.eig_index = j.at("eig_index").get<int>();
  s.score = j.at("score").get<std::size_t>();
  s.second_best_score = j.at("second_best_score").get<std::size_t>();
  s.gap = j.at("gap").get<std::size_t>();
  s.crossed = j.value("crossed", false);
  s.candidates.clear();
  for (const auto& c : j.value("candidates", json::array())) {
    s.candidates.emplace_back(c.at("eig_index").get<int>(), c.at("score").get<std::size_t>());
  }
  s.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const PolarityMap& m) {
  j = json{{"c1", to_string(m.c1)}, {"c2", to_string(m.c2)}};
}

void from_json(const json& j, PolarityMap& m) {
  m.c1 = parse_polarity(j.at("c1").get<std::string>());
  m.c2 = parse_polarity(j.at("c2").get<std::string>());
}

void to_json(json& j, const SessionSettings& s) {
  j = json{{"f_count", s.f_count},
           {"c_param", s.c_param},
           {"unambiguous_fraction", s.unambiguous_fraction},
           {"kmeans_runs", s.kmeans_runs},
           {"base_seed", s.base_seed}};
}

void from_json(const json& j, SessionSettings& s) {
  SessionSettings d;
  s.f_count = j.value("f_count", d.f_count);
  s.c_param = j.value("c_param", d.c_param);
  s.unambiguous_fraction = j.value("unambiguous_fraction", d.unambiguous_fraction);
  s.kmeans_runs = j.value("kmeans_runs", d.kmeans_runs);
  s.base_seed = j.value("base_seed", d.base_seed);
}

void to_json(json& j, const SelectionResult& r) {
  j = json{{"assign", r.partition.assign},
           {"provenance", r.partition.provenance},
           {"cluster_polarity", {to_string(r.cluster_polarity[0]), to_string(r.cluster_polarity[1])}},
           {"cluster_sizes", {r.cluster_sizes[0], r.cluster_sizes[1]}},
           {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
}

void from_json(const json& j, SelectionResult& r) {
  r.partition.assign = j.at("assign").get<std::vector<int>>();
  r.partition.provenance = j.value("provenance", std::string{});
  const auto& cp = j.at("cluster_polarity");
  r.cluster_polarity = {parse_polarity(cp.at(0).get<std::string>()),
                        parse_polarity(cp.at(1).get<std::string>())};
  const auto& cs = j.at("cluster_sizes");
  r.cluster_sizes = {cs.at(0).get<std::size_t>(), cs.at(1).get<std::size_t>()};
  if (j.contains("metrics") && !j["metrics"].is_null()) {
    r.metrics = j["metrics"].get<MetricReport>();
  } else {
    r.metrics.reset();
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const SelectionAttempt& a) {
  j = json{{"indices", a.indices},
           {"source", to_string(a.source)},
           {"polarity_map", a.polarity},
           {"note", a.note},
           {"result", a.result},
           {"at", a.at}};
  if (a.score) j["score"] = *a.score;
}

void from_json(const json& j, SelectionAttempt& a) {
  a.indices = j.at("indices").get<std::vector<int>>();
  a.source = parse_selection_source(j.at("source").get<std::string>());
  a.polarity = j.at("polarity_map").get<PolarityMap>();
  a.note = j.value("note", std::string{});
  a.result = j.at("result").get<SelectionResult>();
  a.at = j.value("at", std::string{});
  if (j.contains("score")) a.score = j["score"].get<SelectionScore>();
}

void to_json(json& j, const FeedbackSession& s) {
  j = json{{"v", kSessionSchemaVersion},
           {"session_id", s.session_id},
           {"corpus_ref", s.corpus_ref},
           {"settings", s.settings},
           {"revision", s.revision},
           {"created", s.created},
           {"updated", s.updated},
           {"profiles", s.profiles},
           {"history", s.history}};
  if (const auto* cur = s.current()) {
    j["selection"] = {{"indices", cur->indices}, {"source", to_string(cur->source)}};
    j["polarity_map"] = cur->polarity;
    j["result"] = cur->result;
  } else {
    j["selection"] = nullptr;
    j["polarity_map"] = nullptr;
    j["result"] = nullptr;
  }
}

void from_json(const json& j, FeedbackSession& s) {
  int v = j.at("v").get<int>();
  if (v != kSessionSchemaVersion) {
    throw Error(ErrorCode::kParse, "unsupported session schema version " + std::to_string(v));
  }
  s.session_id = j.at("session_id").get<std::string>();
  s.corpus_ref = j.at("corpus_ref").get<std::string>();
  s.settings = j.value("settings", SessionSettings{});
  s.revision = j.value("revision", std::uint64_t{0});
  s.created = j.value("created", std::string{});
  s.updated = j.value("updated", std::string{});
  s.profiles = j.value("profiles", std::vector<DimensionProfile>{});
  s.history = j.value("history", std::vector<SelectionAttempt>{});
}

}  // namespace dimminer
