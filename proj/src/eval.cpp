#include "dimminer/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dimminer/error.hpp"
#include "dimminer/margin_classifier.hpp"
#include "dimminer/random.hpp"

namespace dimminer {

namespace {

std::vector<std::size_t> scope(std::size_t n, std::optional<std::span<const std::size_t>> subset) {
  if (subset) {
    for (auto i : *subset) {
      if (i >= n) throw Error(ErrorCode::kInvalidArgument, "subset position out of range");
    }
    return {subset->begin(), subset->end()};
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

double choose2(std::int64_t x) { return static_cast<double>(x * (x - 1) / 2); }

}  // namespace

double accuracy(const Partition& p, std::span<const int> gold,
                std::optional<std::span<const std::size_t>> subset) {
  if (gold.size() != p.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gold labels do not cover the partition");
  }
  auto docs = scope(p.size(), subset);
  if (docs.empty()) throw Error(ErrorCode::kInvalidArgument, "accuracy over an empty set");
  std::set<int> classes;
  for (auto i : docs) classes.insert(gold[i]);
  if (classes.size() > 2) {
    throw Error(ErrorCode::kInvalidArgument, "accuracy needs at most two gold classes");
  }
  const int first_class = *classes.begin();
  // Matches under the bijection cluster 0 <-> first class.
  std::size_t straight = 0;
  for (auto i : docs) {
    bool is_first = gold[i] == first_class;
    if ((p.assign[i] == 0) == is_first) ++straight;
  }
  const std::size_t best = std::max(straight, docs.size() - straight);
  return 100.0 * static_cast<double>(best) / static_cast<double>(docs.size());
}

double ari(std::span<const int> u, std::span<const int> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ari over partitions of different document sets");
  }
  const auto n = static_cast<std::int64_t>(u.size());
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> a;
  std::map<int, std::int64_t> b;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++joint[{u[i], v[i]}];
    ++a[u[i]];
    ++b[v[i]];
  }
  double sum_joint = 0.0;
  for (const auto& [key, count] : joint) sum_joint += choose2(count);
  double sum_a = 0.0;
  for (const auto& [key, count] : a) sum_a += choose2(count);
  double sum_b = 0.0;
  for (const auto& [key, count] : b) sum_b += choose2(count);
  const double total = choose2(n);
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  // Both labelings trivial (one cluster, or all singletons): identical structure.
  if (denom == 0.0) return 1.0;
  return (sum_joint - expected) / denom;
}

double ari(const Partition& u, const Partition& v) { return ari(u.assign, v.assign); }

MetricReport evaluate(const Partition& p, std::span<const int> gold,
                      std::optional<std::span<const std::size_t>> subset) {
  MetricReport r;
  r.accuracy_percent = accuracy(p, gold, subset);
  auto docs = scope(p.size(), subset);
  std::vector<int> pu;
  std::vector<int> gv;
  for (auto i : docs) {
    pu.push_back(p.assign[i]);
    gv.push_back(gold[i]);
  }
  r.ari = ari(pu, gv);
  r.per_run_accuracy = {r.accuracy_percent};
  r.per_run_ari = {r.ari};
  return r;
}

MetricReport evaluate_run(const ClusterRun& run, std::span<const int> gold,
                          std::optional<std::span<const std::size_t>> subset) {
  MetricReport r;
  r.runs_aggregated = run.per_run_partitions.size();
  for (const auto& p : run.per_run_partitions) {
    auto one = evaluate(p, gold, subset);
    r.per_run_accuracy.push_back(one.accuracy_percent);
    r.per_run_ari.push_back(one.ari);
  }
  const auto count = static_cast<double>(r.runs_aggregated);
  r.accuracy_percent =
      std::accumulate(r.per_run_accuracy.begin(), r.per_run_accuracy.end(), 0.0) / count;
  r.ari = std::accumulate(r.per_run_ari.begin(), r.per_run_ari.end(), 0.0) / count;
  return r;
}

std::vector<int> binary_gold(const Corpus& corpus) {
  auto labels = corpus.gold_labels();
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() > 2) {
    throw Error(ErrorCode::kInvalidArgument, "gold labels have more than two classes");
  }
  return labels;
}

std::vector<int> domain_gold(const Corpus& corpus) {
  std::set<std::string> tags;
  for (const auto& d : corpus.documents()) {
    if (!d.domain_tag) {
      throw Error(ErrorCode::kInvalidArgument, "document '" + d.id + "' has no domain tag");
    }
    tags.insert(*d.domain_tag);
  }
  if (tags.size() > 2) throw Error(ErrorCode::kInvalidArgument, "more than two domain tags");
  std::vector<int> out;
  for (const auto& d : corpus.documents()) out.push_back(*d.domain_tag == *tags.begin() ? 0 : 1);
  return out;
}

CrossValidationResult supervised_cv(const Corpus& corpus, std::size_t folds, double c_param,
                                    std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "cross-validation needs at least 2 folds");
  auto gold = binary_gold(corpus);
  std::set<int> classes(gold.begin(), gold.end());
  const int positive_class = *classes.rbegin();

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(corpus.size());
  for (int cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == cls) members.push_back(i);
    }
    shuffle_in_place(members, rng);
    for (std::size_t r = 0; r < members.size(); ++r) fold_of[members[r]] = r % folds;
  }

  CrossValidationResult out;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<SparseBinaryVector> train_x;
    std::vector<int> train_y;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (fold_of[i] == f) {
        test.push_back(i);
      } else {
        train_x.push_back(corpus.document(i).features);
        train_y.push_back(gold[i] == positive_class ? 1 : -1);
      }
    }
    bool has_pos = std::count(train_y.begin(), train_y.end(), 1) > 0;
    bool has_neg = std::count(train_y.begin(), train_y.end(), -1) > 0;
    if (!has_pos || !has_neg) {
      throw Error(ErrorCode::kDegenerate, "a class is absent from training fold " + std::to_string(f));
    }
    if (test.empty()) continue;
    auto model = train_margin_classifier(train_x, train_y, corpus.vocabulary().size(), c_param);
    std::size_t correct = 0;
    for (auto i : test) {
      int predicted = model.predict(corpus.document(i).features);
      if (predicted == (gold[i] == positive_class ? 1 : -1)) ++correct;
    }
    out.per_fold_accuracy.push_back(100.0 * static_cast<double>(correct) /
                                    static_cast<double>(test.size()));
  }
  out.mean_accuracy_percent =
      std::accumulate(out.per_fold_accuracy.begin(), out.per_fold_accuracy.end(), 0.0) /
      static_cast<double>(out.per_fold_accuracy.size());
  return out;
}

std::string format_metric_table(std::span<const MetricRow> rows) {
  std::size_t width = std::string("system").size();
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %8s  %7s  %4s\n", static_cast<int>(width), "system",
                "accuracy", "ari", "runs");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %8.1f  %7.3f  %4zu\n", static_cast<int>(width),
                  r.name.c_str(), r.report.accuracy_percent, r.report.ari, r.report.runs_aggregated);
    out += buf;
  }
  return out;
}

}  // namespace dimminer
