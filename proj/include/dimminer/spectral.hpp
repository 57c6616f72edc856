#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dimminer/corpus.hpp"

namespace dimminer {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Document-document similarity with a zero diagonal; degrees are row sums.
struct SimilarityGraph {
  SparseMatrix weights;
  Eigen::VectorXd degrees;

  std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }
};

enum class LaplacianKind { kNormalized, kInterestedReader };

std::string_view to_string(LaplacianKind kind);
LaplacianKind parse_laplacian_kind(std::string_view name);

struct Laplacian {
  SparseMatrix matrix;  // over active documents only
  LaplacianKind kind = LaplacianKind::kNormalized;
  std::vector<std::size_t> active;    // corpus positions, one per matrix row
  std::vector<std::size_t> isolated;  // corpus positions left out of the matrix
  std::size_t n_documents = 0;
};

// Top-m eigenpairs, eigenvalues descending. Column i-1 of `eigenvectors` is
// e_i; rows follow `active`. The largest-magnitude entry of each column is
// positive.
struct EigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::vector<std::size_t> active;
  std::vector<std::size_t> isolated;
  std::size_t n_documents = 0;
  LaplacianKind kind = LaplacianKind::kNormalized;
  double residual_tol = 1e-8;

  std::size_t m() const { return static_cast<std::size_t>(eigenvalues.size()); }
  std::size_t n_active() const { return active.size(); }
  // One-based, as in e_1..e_m.
  Eigen::VectorXd vector(std::size_t index) const;
};

struct EigenSolverOptions {
  // Dense tridiagonalization up to this many active documents, Lanczos above.
  std::size_t dense_limit = 4096;
  double lanczos_tol = 1e-10;
  std::uint64_t lanczos_seed = 0;
  std::size_t lanczos_iteration_factor = 10;
  double residual_tol = 1e-8;
};

SimilarityGraph similarity_matrix(const Corpus& corpus);
// Builds a graph from an explicit symmetric weight matrix; the diagonal is
// dropped. Mostly for tests and synthetic graphs.
SimilarityGraph graph_from_weights(const Eigen::MatrixXd& weights);

Laplacian normalized_laplacian(const SimilarityGraph& g);

// k-NN sparsified similarity, then (S' + d_max I - D') / d_max. All documents
// stay active.
Laplacian irm_laplacian(const SimilarityGraph& g, std::size_t k);
// The sparsified S' on its own, exposed for the symmetry property.
SparseMatrix knn_sparsify(const SimilarityGraph& g, std::size_t k);

EigenBasis top_eigenpairs(const Laplacian& l, std::size_t m, const EigenSolverOptions& options = {});

// Largest ||L e_i - lambda_i e_i||_2 over the basis.
double max_residual(const Laplacian& l, const EigenBasis& basis);

}  // namespace dimminer
