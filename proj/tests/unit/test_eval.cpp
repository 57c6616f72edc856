#include <doctest.h>

#include <random>

#include "dimminer/error.hpp"
#include "dimminer/eval.hpp"
#include "../support/oracles.hpp"
#include "../support/planted.hpp"

using namespace dimminer;
using dimminer::testing::make_planted;
using dimminer::testing::pair_counting_ari;
using dimminer::testing::PlantedSpec;

namespace {

Partition part(std::vector<int> a) {
  Partition p;
  p.assign = std::move(a);
  return p;
}

}  // namespace

TEST_CASE("accuracy takes the better bijection") {
  std::vector<int> gold{1, 1, 0, 0};
  CHECK(accuracy(part({0, 0, 1, 1}), gold) == 100.0);
  CHECK(accuracy(part({1, 1, 0, 0}), gold) == 100.0);
  CHECK(accuracy(part({0, 0, 0, 1}), gold) == 75.0);
  CHECK(accuracy(part({0, 1, 0, 1}), gold) == 50.0);
  std::vector<std::size_t> sub{0, 1, 3};
  CHECK(accuracy(part({0, 0, 0, 1}), gold, sub) == 100.0);
  CHECK_THROWS_AS(accuracy(part({0, 1, 0}), std::vector<int>{0, 1, 2}), Error);
  CHECK_THROWS_AS(accuracy(part({0, 1}), gold), Error);
}

TEST_CASE("ari small cases") {
  std::vector<int> a{0, 0, 1, 1};
  std::vector<int> b{1, 1, 0, 0};
  std::vector<int> c{0, 1, 0, 1};
  CHECK(ari(a, a) == 1.0);
  CHECK(ari(a, b) == 1.0);
  CHECK(ari(a, c) == doctest::Approx(-0.5));
  CHECK(ari(part(a), part(c)) == doctest::Approx(-0.5));
  CHECK(ari(std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 1}) == 1.0);
  CHECK_THROWS_AS(ari(a, std::vector<int>{0, 1}), Error);
}

TEST_CASE("ari matches pair counting on random labelings") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 49);
    const std::size_t ku = 1 + uniform_index(rng, 4);
    const std::size_t kv = 1 + uniform_index(rng, 4);
    std::vector<int> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = static_cast<int>(uniform_index(rng, ku));
      v[i] = static_cast<int>(uniform_index(rng, kv));
    }
    CHECK(ari(u, v) == doctest::Approx(pair_counting_ari(u, v)).epsilon(1e-9));
    CHECK(ari(u, v) == doctest::Approx(ari(v, u)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_run averages the runs") {
  ClusterRun run;
  run.per_run_partitions = {part({0, 0, 1, 1}), part({0, 0, 0, 1})};
  run.canonical = run.per_run_partitions[0];
  run.runs = 2;
  std::vector<int> gold{0, 0, 1, 1};
  auto r = evaluate_run(run, gold);
  CHECK(r.runs_aggregated == 2);
  CHECK(r.accuracy_percent == doctest::Approx(87.5));
  CHECK(r.per_run_accuracy == std::vector<double>{100.0, 75.0});
  CHECK(r.ari == doctest::Approx(0.5 * (1.0 + ari(std::vector<int>{0, 0, 0, 1}, gold))));
}

TEST_CASE("supervised cross-validation") {
  PlantedSpec spec;
  spec.n_docs = 200;
  auto pc = make_planted(spec);
  auto corpus = build_corpus(pc.docs, Representation::kBow);
  auto cv = supervised_cv(corpus, 5);
  CHECK(cv.per_fold_accuracy.size() == 5);
  CHECK(cv.mean_accuracy_percent >= 99.0);

  auto shuffled = pc.docs;
  std::mt19937_64 rng(21);
  std::vector<std::optional<int>> labels;
  for (auto& d : shuffled) labels.push_back(d.gold_label);
  shuffle_in_place(labels, rng);
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].gold_label = labels[i];
  auto noise = supervised_cv(build_corpus(shuffled, Representation::kBow), 5);
  CHECK(noise.mean_accuracy_percent >= 35.0);
  CHECK(noise.mean_accuracy_percent <= 65.0);
}

TEST_CASE("gold label helpers") {
  PlantedSpec spec;
  spec.n_docs = 40;
  auto pc = make_planted(spec);
  auto corpus = build_corpus(pc.docs, Representation::kBoaw);
  CHECK(binary_gold(corpus) == pc.sentiment);
  CHECK(domain_gold(corpus) == pc.topic);
}

TEST_CASE("metric table lists every row") {
  MetricRow a{"second-eig", {}};
  a.report.accuracy_percent = 71.25;
  a.report.ari = 0.18;
  MetricRow b{"user", {}};
  b.report.accuracy_percent = 90.0;
  std::vector<MetricRow> rows{a, b};
  auto text = format_metric_table(rows);
  CHECK(text.find("second-eig") != std::string::npos);
  CHECK(text.find("71.2") != std::string::npos);
  CHECK(text.find("user") != std::string::npos);
}
