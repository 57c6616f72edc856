// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// when any criterion fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "dimminer/cluster.hpp"
#include "dimminer/dimension.hpp"
#include "dimminer/error.hpp"
#include "dimminer/eval.hpp"
#include "dimminer/feedback.hpp"
#include "dimminer/pipeline.hpp"
#include "dimminer/spectral.hpp"
#include "../support/oracles.hpp"
#include "../support/planted.hpp"

using namespace dimminer;
namespace dt = dimminer::testing;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

Verdict pass_if(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

std::string line(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict spectral_correctness() {
  std::mt19937_64 rng(2024);
  double worst_e1 = 0.0, worst_res = 0.0, worst_bound = 0.0;
  for (int g = 0; g < 20; ++g) {
    const std::size_t n = 10 + uniform_index(rng, 191);
    const double density = 0.02 + 0.2 * uniform_unit(rng);
    auto s = dt::random_connected_graph(n, density, rng);
    auto graph = graph_from_weights(dt::to_eigen(s));
    auto l = normalized_laplacian(graph);
    auto basis = top_eigenpairs(l, std::min<std::size_t>(5, n));
    Eigen::VectorXd root = graph.degrees.cwiseSqrt();
    root.normalize();
    worst_e1 = std::max(worst_e1, (basis.eigenvectors.col(0) - root).cwiseAbs().maxCoeff());
    worst_res = std::max(worst_res, max_residual(l, basis));
    worst_bound = std::max(worst_bound, basis.eigenvalues.cwiseAbs().maxCoeff() - 1.0);
  }
  bool ok = worst_e1 <= 1e-8 && worst_res <= 1e-8 && worst_bound <= 1e-9;
  return pass_if(ok, line("20 graphs; max |e1 - D^1/2 1| %.2e, max residual %.2e, max |lambda|-1 %.2e", worst_e1,
                         worst_res, worst_bound));
}

Verdict ncut_oracle() {
  std::mt19937_64 rng(77);
  int exact = 0, near_opt = 0, sign_near = 0;
  double worst_ratio = 0.0;
  for (int g = 0; g < 30; ++g) {
    const std::size_t n = 4 + uniform_index(rng, 9);
    auto s = dt::random_connected_graph(n, 0.3, rng);
    auto graph = graph_from_weights(dt::to_eigen(s));

    bool all_exact = true;
    for (int t = 0; t < 20; ++t) {
      Partition p;
      p.assign.resize(n);
      for (auto& a : p.assign) a = static_cast<int>(uniform_index(rng, 2));
      p.assign[0] = 0;
      p.assign[n - 1] = 1;
      if (ncut_value(p, graph) != dt::brute_ncut(s, p.assign)) all_exact = false;
    }
    exact += all_exact;

    auto basis = top_eigenpairs(normalized_laplacian(graph), 2);
    const double optimum = dt::brute_min_ncut(s);
    const double ratio = ncut_value(threshold_split(basis, graph), graph) / optimum;
    worst_ratio = std::max(worst_ratio, ratio);
    near_opt += ratio <= 1.2;

    Partition sign;
    sign.assign.resize(n);
    for (std::size_t r = 0; r < basis.n_active(); ++r) {
      sign.assign[basis.active[r]] = basis.eigenvectors(static_cast<Eigen::Index>(r), 1) >= 0.0 ? 0 : 1;
    }
    if (sign.cluster_size(0) > 0 && sign.cluster_size(1) > 0) sign_near += ncut_value(sign, graph) / optimum <= 1.2;
  }
  return pass_if(exact == 30 && near_opt >= 27,
                 line("ncut exact on %d/30 graphs; e2 threshold split within 1.2x of optimum on %d/30 (worst "
                      "%.3fx); zero threshold alone %d/30",
                      exact, near_opt, worst_ratio, sign_near));
}

Verdict ari_oracle() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  bool self_one = true;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 49);
    const std::size_t ku = 1 + uniform_index(rng, 5);
    const std::size_t kv = 1 + uniform_index(rng, 5);
    std::vector<int> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = static_cast<int>(uniform_index(rng, ku));
      v[i] = static_cast<int>(uniform_index(rng, kv));
    }
    worst = std::max(worst, std::abs(ari(u, v) - dt::pair_counting_ari(u, v)));
    self_one = self_one && ari(u, u) == 1.0;
  }
  const double hand = ari(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1});
  return pass_if(worst <= 1e-12 && self_one && std::abs(hand + 0.5) <= 1e-12,
                 line("100 pairs, max |diff| %.2e; ari(u,u)=1 %s; {ab|cd} vs {ac|bd} = %.6f", worst,
                     self_one ? "yes" : "no", hand));
}

struct PlantedSetup {
  dt::PlantedCorpus pc;
  Corpus corpus;
  EigenBasis basis;
  std::vector<DimensionProfile> profiles;
};

PlantedSetup planted_setup(const dt::PlantedSpec& spec) {
  auto pc = dt::make_planted(spec);
  auto corpus = build_corpus(pc.docs, Representation::kBow);
  auto basis = top_eigenpairs(normalized_laplacian(similarity_matrix(corpus)), 5);
  auto profiles = build_profiles(corpus, basis);
  return {std::move(pc), std::move(corpus), std::move(basis), std::move(profiles)};
}

ClusterRun cluster_along(const EigenBasis& basis, int idx) {
  const int indices[] = {idx};
  return two_means(embed(basis, indices), 10, 0);
}

// Sentiment eigenvector of a planted corpus: the e_i (i = 3..5) whose 1-D
// clustering best matches the sentiment factor.
std::pair<int, double> sentiment_eigenvector(const PlantedSetup& s) {
  int best = 0;
  double best_acc = -1.0;
  for (int i = 3; i <= 5; ++i) {
    double acc = evaluate_run(cluster_along(s.basis, i), s.pc.sentiment).accuracy_percent;
    if (acc > best_acc) {
      best_acc = acc;
      best = i;
    }
  }
  return {best, best_acc};
}

Verdict planted_two_factor() {
  dt::PlantedSpec spec;
  spec.seed = 1;
  auto s = planted_setup(spec);

  const double topic_acc = evaluate_run(cluster_along(s.basis, 2), s.pc.topic).accuracy_percent;
  const bool a = topic_acc >= 95.0;

  auto [sent_idx, sent_acc] = sentiment_eigenvector(s);
  const bool b = sent_acc >= 90.0;

  const DimensionProfile* profile = nullptr;
  for (const auto& p : s.profiles) {
    if (p.eig_index == sent_idx) profile = &p;
  }
  std::set<std::string> planted(s.pc.positive.begin(), s.pc.positive.end());
  planted.insert(s.pc.negative.begin(), s.pc.negative.end());
  auto count_top10 = [&](const FeatureList& list) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < std::min<std::size_t>(10, list.size()); ++k) c += planted.count(list.entries[k].term);
    return c;
  };
  const std::size_t c1 = count_top10(profile->list_c1);
  const std::size_t c2 = count_top10(profile->list_c2);
  const bool c = c1 + c2 >= 8;

  auto lex = dt::planted_lexicon(s.pc);
  auto pick = lexicon_select(s.profiles, lex);
  const bool d = pick.eig_index == sent_idx;

  auto run = cluster_along(s.basis, sent_idx);
  std::vector<std::size_t> subset;
  for (const auto* ids : {&profile->unambiguous_top, &profile->unambiguous_bottom}) {
    for (const auto& id : *ids) subset.push_back(*s.corpus.find(id));
  }
  const double full = evaluate_run(run, s.pc.sentiment).accuracy_percent;
  const double unamb = evaluate_run(run, s.pc.sentiment, subset).accuracy_percent;
  const bool e = unamb > full;

  return pass_if(a && b && c && d && e,
                 line("(a) topic via e2 %.2f%% %s; (b) sentiment via e%d %.2f%% %s; (c) sentiment words in top-10 "
                     "lists %zu+%zu %s; (d) lexicon picks e%d %s; (e) unambiguous %.2f%% > full %.2f%% %s",
                     topic_acc, a ? "ok" : "NO", sent_idx, sent_acc, b ? "ok" : "NO", c1, c2, c ? "ok" : "NO",
                     pick.eig_index, d ? "ok" : "NO", unamb, full, e ? "ok" : "NO"));
}

Verdict domain_adaptation() {
  dt::PlantedSpec src_spec;
  src_spec.seed = 1;
  src_spec.topic_prefix = "kit";
  dt::PlantedSpec dst_spec = src_spec;
  dst_spec.seed = 101;
  dst_spec.topic_prefix = "ele";
  dst_spec.id_prefix = "t";
  auto src = planted_setup(src_spec);
  auto dst = planted_setup(dst_spec);

  auto [src_idx, src_acc] = sentiment_eigenvector(src);
  auto [dst_idx, dst_acc] = sentiment_eigenvector(dst);
  const DimensionProfile* source = nullptr;
  for (const auto& p : src.profiles) {
    if (p.eig_index == src_idx) source = &p;
  }
  auto score = adapt_select(*source, dst.profiles);
  const bool ok = score.eig_index == dst_idx && score.score >= 10 && score.gap >= 5;
  return pass_if(ok, line("source e%d (%.1f%%) -> picked e%d, target sentiment e%d (%.1f%%); score %zu (need >= 10), "
                         "gap %zu (need >= 5)",
                         src_idx, src_acc, score.eig_index, dst_idx, dst_acc, score.score, score.gap));
}

TermSet random_terms(std::mt19937_64& rng, std::size_t vocab, std::size_t size) {
  TermSet t;
  while (t.size() < size) t.insert("w" + std::to_string(uniform_index(rng, vocab)));
  return t;
}

DimensionProfile random_profile(std::mt19937_64& rng, int idx) {
  DimensionProfile p;
  p.eig_index = idx;
  for (const auto& w : random_terms(rng, 60, 15)) p.list_c1.entries.push_back({w, 1.0});
  for (const auto& w : random_terms(rng, 60, 15)) p.list_c2.entries.push_back({w, -1.0});
  return p;
}

Verdict selection_invariances() {
  std::mt19937_64 rng(5);
  int symmetric = 0;
  for (int t = 0; t < 100; ++t) {
    auto a1 = random_terms(rng, 80, 20), a2 = random_terms(rng, 80, 20);
    auto b1 = random_terms(rng, 80, 20), b2 = random_terms(rng, 80, 20);
    symmetric += eig_similarity(a1, a2, b1, b2).score == eig_similarity(b1, b2, a1, a2).score;
  }

  int invariant = 0;
  for (int t = 0; t < 100; ++t) {
    auto source = random_profile(rng, 2);
    std::vector<DimensionProfile> targets;
    for (int i = 2; i <= 5; ++i) targets.push_back(random_profile(rng, i));
    auto base = adapt_select(source, targets);
    auto swapped_source = source;
    std::swap(swapped_source.list_c1, swapped_source.list_c2);
    auto swapped_targets = targets;
    const std::size_t k = uniform_index(rng, targets.size());
    std::swap(swapped_targets[k].list_c1, swapped_targets[k].list_c2);
    auto s1 = adapt_select(swapped_source, targets);
    auto s2 = adapt_select(source, swapped_targets);
    invariant += s1.eig_index == base.eig_index && s1.score == base.score && s2.eig_index == base.eig_index &&
                 s2.score == base.score;
  }

  int perm = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 60);
    Partition p, q;
    std::vector<int> gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.assign.push_back(static_cast<int>(uniform_index(rng, 2)));
      q.assign.push_back(1 - p.assign.back());
      gold[i] = static_cast<int>(uniform_index(rng, 2));
    }
    perm += accuracy(p, gold) == accuracy(q, gold) && ari(p, Partition{gold, {}}) == ari(q, Partition{gold, {}});
  }
  return pass_if(symmetric == 100 && invariant == 100 && perm == 100,
                 line("symmetry %d/100; winner unchanged by list swaps %d/100; metrics unchanged by relabeling %d/100",
                     symmetric, invariant, perm));
}

// Looks for <dir>/{mov,kit,boo,dvd,ele}.jsonl and <dir>/lexicon.tsv.
Verdict dataset_check() {
  const char* dir = std::getenv("DIMMINER_DATASETS");
  if (dir == nullptr || !std::filesystem::exists(dir)) {
    return {Outcome::kSkip, "set DIMMINER_DATASETS to a directory of review corpora to run"};
  }
  const std::filesystem::path root(dir);
  std::ifstream lin(root / "lexicon.tsv");
  if (!lin) return {Outcome::kSkip, "no lexicon.tsv in " + root.string()};
  auto lexicon = load_lexicon(lin);
  const std::vector<std::pair<std::string, double>> table{
      {"mov", 70.9}, {"kit", 69.7}, {"boo", 58.9}, {"dvd", 55.3}, {"ele", 50.8}};
  int within = 0, found = 0, lex_hits = 0;
  std::string detail;
  for (const auto& [name, expected] : table) {
    std::ifstream in(root / (name + ".jsonl"));
    if (!in) continue;
    ++found;
    auto docs = read_documents_jsonl(in);
    auto corpus = build_corpus(docs, Representation::kBow);
    auto basis = top_eigenpairs(normalized_laplacian(similarity_matrix(corpus)), 5);
    PipelineConfig config;
    auto second = second_eig_baseline(corpus, basis, config);
    const double acc = second.metrics->accuracy_percent;
    within += std::abs(acc - expected) <= 5.0;
    auto gold = binary_gold(corpus);
    int best = 2;
    double best_acc = -1.0;
    for (int i = 2; i <= 5; ++i) {
      double a = evaluate_run(cluster_along(basis, i), gold).accuracy_percent;
      if (a > best_acc) {
        best_acc = a;
        best = i;
      }
    }
    auto pick = lexicon_select(build_profiles(corpus, basis), lexicon);
    lex_hits += pick.eig_index == best;
    detail += line("%s e2 %.1f%% (paper %.1f), lexicon e%d vs best e%d; ", name.c_str(), acc, expected,
                  pick.eig_index, best);
  }
  if (found < 5) return {Outcome::kSkip, line("found %d of 5 corpora", found)};
  return pass_if(within == 5 && lex_hits >= 4, detail + line("within 5 points %d/5, lexicon %d/5", within, lex_hits));
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {"spectral-correctness", 5.0, spectral_correctness},
      {"ncut-oracle", 30.0, ncut_oracle},
      {"ari-oracle", 5.0, ari_oracle},
      {"planted-two-factor", 60.0, planted_two_factor},
      {"domain-adaptation", 60.0, domain_adaptation},
      {"selection-invariances", 60.0, selection_invariances},
      {"dataset-check", 600.0 * 5, dataset_check},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Outcome::kFail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.outcome == Outcome::kPass && secs > c.limit_seconds) {
      v.outcome = Outcome::kFail;
      v.detail += line(" [over time limit %.0f s]", c.limit_seconds);
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kSkip ? "SKIP" : "FAIL";
    std::printf("%s %-22s %7.2fs  %s\n", tag, c.name, secs, v.detail.c_str());
    failures += v.outcome == Outcome::kFail;
  }
  return failures == 0 ? 0 : 1;
}
