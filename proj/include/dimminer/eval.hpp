#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimminer/cluster.hpp"
#include "dimminer/corpus.hpp"

namespace dimminer {

struct MetricReport {
  double accuracy_percent = 0.0;
  double ari = 0.0;
  std::optional<std::vector<std::string>> subset;  // document ids, when restricted
  std::size_t runs_aggregated = 1;
  std::vector<double> per_run_accuracy;
  std::vector<double> per_run_ari;
};

// Percentage of documents whose cluster matches the gold class under the
// better of the two cluster/class bijections. `subset` holds corpus positions.
double accuracy(const Partition& p, std::span<const int> gold,
                std::optional<std::span<const std::size_t>> subset = std::nullopt);

// Adjusted Rand Index from the contingency table of two labelings.
double ari(std::span<const int> u, std::span<const int> v);
double ari(const Partition& u, const Partition& v);

MetricReport evaluate(const Partition& p, std::span<const int> gold,
                      std::optional<std::span<const std::size_t>> subset = std::nullopt);

// Means over the per-run partitions; per-run values retained.
MetricReport evaluate_run(const ClusterRun& run, std::span<const int> gold,
                          std::optional<std::span<const std::size_t>> subset = std::nullopt);

// Gold labels of the corpus as a Partition-compatible vector; throws when any
// label is missing or more than two classes occur.
std::vector<int> binary_gold(const Corpus& corpus);
// Domain tags mapped to 0/1 in sorted order, for topic evaluation of mixed corpora.
std::vector<int> domain_gold(const Corpus& corpus);

struct CrossValidationResult {
  double mean_accuracy_percent = 0.0;
  std::vector<double> per_fold_accuracy;
};

// Stratified k-fold accuracy of the margin classifier on gold labels.
CrossValidationResult supervised_cv(const Corpus& corpus, std::size_t folds, double c_param = 1.0,
                                    std::uint64_t seed = 0);

struct MetricRow {
  std::string name;
  MetricReport report;
};

// Aligned plain-text table: name, accuracy, ARI, runs.
std::string format_metric_table(std::span<const MetricRow> rows);

}  // namespace dimminer
