#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dimminer/spectral.hpp"

namespace dimminer {

// Active documents projected onto selected eigenvectors.
struct Embedding {
  Eigen::MatrixXd points;                // n_active x q
  std::vector<int> source_eig_indices;   // one-based, column order
  bool row_normalized = false;
  std::vector<std::size_t> row_documents;  // corpus position of each row
  std::vector<std::size_t> isolated;       // corpus positions with no row
  std::size_t n_documents = 0;
};

struct Partition {
  std::vector<int> assign;  // cluster id in {0, 1} for every corpus document
  std::string provenance;

  std::size_t size() const { return assign.size(); }
  std::size_t cluster_size(int cluster) const;
};

struct ClusterRun {
  Partition canonical;
  std::vector<Partition> per_run_partitions;
  std::vector<double> per_run_sse;
  std::size_t canonical_run = 0;
  std::size_t runs = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> warnings;
};

// Lloyd iterations for one run, over embedding rows only.
struct LloydResult {
  std::vector<int> assign;
  double sse = 0.0;
  std::size_t iterations = 0;
  std::vector<double> sse_history;  // after each assignment/update step
};

inline constexpr std::size_t kMaxLloydIterations = 300;

// Columns are the selected eigenvectors in the given order; rows are scaled to
// unit length only when two or more eigenvectors are selected.
Embedding embed(const EigenBasis& basis, std::span<const int> indices);

LloydResult lloyd_two_means(const Eigen::MatrixXd& points, std::size_t seed_a, std::size_t seed_b,
                            std::size_t max_iterations = kMaxLloydIterations);

// Forgy seeding per run from (base_seed, run index); the canonical partition
// is the run with the smallest SSE. Isolated documents join the larger cluster.
ClusterRun two_means(const Embedding& emb, std::size_t runs, std::uint64_t base_seed);

// Sum of S_ij over pairs split across the two clusters, each pair once.
double cut_value(const Partition& p, const SimilarityGraph& g);

double ncut_value(const Partition& p, const SimilarityGraph& g);

// Orders active documents by D^{-1/2} e_2 and keeps the splitting point with
// the smallest NCut. Isolated documents join the larger side.
Partition threshold_split(const EigenBasis& basis, const SimilarityGraph& g);

}  // namespace dimminer
