#include "dimminer/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "dimminer/error.hpp"
#include "dimminer/random.hpp"

namespace dimminer {

std::string_view to_string(LaplacianKind kind) {
  return kind == LaplacianKind::kNormalized ? "normalized" : "irm";
}

LaplacianKind parse_laplacian_kind(std::string_view name) {
  if (name == "normalized") return LaplacianKind::kNormalized;
  if (name == "irm") return LaplacianKind::kInterestedReader;
  throw Error(ErrorCode::kConfig, "unknown laplacian kind '" + std::string(name) + "'");
}

Eigen::VectorXd EigenBasis::vector(std::size_t index) const {
  if (index < 1 || index > m()) {
    throw Error(ErrorCode::kInvalidArgument,
                "eigenvector index " + std::to_string(index) + " outside 1.." + std::to_string(m()));
  }
  return eigenvectors.col(static_cast<Eigen::Index>(index - 1));
}

namespace {

Eigen::VectorXd row_sums(const SparseMatrix& s) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(s.rows());
  for (int k = 0; k < s.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) d(it.row()) += it.value();
  }
  return d;
}

SparseMatrix drop_diagonal(const SparseMatrix& s) {
  SparseMatrix out = s;
  out.prune([](Eigen::Index row, Eigen::Index col, double value) {
    return row != col && value != 0.0;
  });
  out.makeCompressed();
  return out;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = 2.0 * uniform_unit(rng) - 1.0;
  }
  return v;
}

void orthogonalize(Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& against) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : against) w -= q.dot(w) * q;
  }
}

struct RitzPairs {
  std::vector<double> values;
  std::vector<Eigen::VectorXd> vectors;
  double worst_estimate = 0.0;
  bool converged = false;
};

// Lanczos with full reorthogonalization inside the complement of `locked`.
// Breakdown restarts with a fresh random vector so disconnected spectra are
// still explored.
RitzPairs lanczos_top(const SparseMatrix& a, std::size_t count,
                      const std::vector<Eigen::VectorXd>& locked, std::mt19937_64& rng,
                      double tol, std::size_t iteration_cap) {
  const Eigen::Index n = a.rows();
  const std::size_t max_dim = static_cast<std::size_t>(n) - locked.size();
  count = std::min(count, max_dim);
  RitzPairs out;
  if (count == 0) {
    out.converged = true;
    return out;
  }

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis[j] and basis[j+1]

  auto fresh_vector = [&](Eigen::VectorXd& out_vec) -> bool {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd v = random_vector(rng, n);
      orthogonalize(v, locked);
      orthogonalize(v, basis);
      double norm = v.norm();
      if (norm > 1e-8) {
        out_vec = v / norm;
        return true;
      }
    }
    return false;
  };

  {
    Eigen::VectorXd start;
    if (!fresh_vector(start)) return out;
    basis.push_back(std::move(start));
  }
  std::size_t iterations = 0;

  while (true) {
    const std::size_t j = basis.size() - 1;
    Eigen::VectorXd w = a * basis[j];
    if (j > 0 && beta[j - 1] != 0.0) w -= beta[j - 1] * basis[j - 1];
    double aj = basis[j].dot(w);
    alpha.push_back(aj);
    w -= aj * basis[j];
    orthogonalize(w, locked);
    orthogonalize(w, basis);
    double bj = w.norm();
    ++iterations;

    const std::size_t dim = basis.size();
    const bool breakdown = bj < 1e-12;
    Eigen::VectorXd next;
    bool have_next = false;
    if (dim < max_dim) {
      if (!breakdown) {
        next = w / bj;
        have_next = true;
      } else {
        have_next = fresh_vector(next);
      }
    }
    if (breakdown) bj = 0.0;
    const bool space_done = !have_next;

    if (dim >= count || space_done) {
      const bool check = space_done || breakdown || dim % 4 == 0;
      if (check) {
        const std::size_t take = std::min(count, dim);
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
          t(i, i) = alpha[i];
          if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
        const auto& s = tri.eigenvectors();
        double worst = 0.0;
        for (std::size_t r = 0; r < take; ++r) {
          auto col = static_cast<Eigen::Index>(dim - 1 - r);
          worst = std::max(worst, std::abs(bj * s(static_cast<Eigen::Index>(dim - 1), col)));
        }
        if (worst <= tol || space_done || iterations >= iteration_cap) {
          out.worst_estimate = worst;
          out.converged = worst <= tol || space_done;
          for (std::size_t r = 0; r < take; ++r) {
            auto col = static_cast<Eigen::Index>(dim - 1 - r);
            Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
            for (std::size_t i = 0; i < dim; ++i) v += s(static_cast<Eigen::Index>(i), col) * basis[i];
            v.normalize();
            out.values.push_back(tri.eigenvalues()(col));
            out.vectors.push_back(std::move(v));
          }
          return out;
        }
      }
    }
    if (iterations >= iteration_cap) {
      out.converged = false;
      out.worst_estimate = std::numeric_limits<double>::infinity();
      return out;
    }
    beta.push_back(bj);
    basis.push_back(std::move(next));
  }
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      double v = std::abs(vectors(r, c));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

void dense_top(const SparseMatrix& a, std::size_t m, Eigen::VectorXd& values,
               Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd dense(a);
  // Symmetrize exactly; the lower triangle is what the solver reads.
  dense = 0.5 * (dense + dense.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumeric, "dense symmetric eigensolver failed to converge");
  }
  const auto n = dense.rows();
  values.resize(static_cast<Eigen::Index>(m));
  vectors.resize(n, static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    auto src = n - 1 - static_cast<Eigen::Index>(i);
    values(static_cast<Eigen::Index>(i)) = solver.eigenvalues()(src);
    vectors.col(static_cast<Eigen::Index>(i)) = solver.eigenvectors().col(src);
  }
}

void lanczos_top_m(const SparseMatrix& a, std::size_t m, const EigenSolverOptions& options,
                   Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::mt19937_64 rng(options.lanczos_seed);
  const std::size_t cap = options.lanczos_iteration_factor * n;

  RitzPairs found = lanczos_top(a, m, {}, rng, options.lanczos_tol, cap);
  if (!found.converged) {
    throw Error(ErrorCode::kNumeric, "lanczos did not converge; worst residual estimate " +
                                         std::to_string(found.worst_estimate));
  }
  // Single-vector Krylov spaces see one vector per distinct eigenvalue; probe
  // the complement until nothing there beats the current m-th eigenvalue.
  for (std::size_t round = 0; round < n && found.values.size() == m; ++round) {
    RitzPairs extra = lanczos_top(a, 1, found.vectors, rng, options.lanczos_tol, cap);
    if (extra.values.empty() || !extra.converged) break;
    double floor_value = found.values.back();
    if (extra.values[0] <= floor_value + options.lanczos_tol) break;
    found.values.back() = extra.values[0];
    found.vectors.back() = extra.vectors[0];
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto x, auto y) { return found.values[x] > found.values[y]; });
    RitzPairs sorted;
    for (auto i : order) {
      sorted.values.push_back(found.values[i]);
      sorted.vectors.push_back(found.vectors[i]);
    }
    sorted.converged = true;
    found = std::move(sorted);
  }
  if (found.values.size() < m) {
    throw Error(ErrorCode::kNumeric, "lanczos found fewer eigenpairs than requested");
  }
  values.resize(static_cast<Eigen::Index>(m));
  vectors.resize(a.rows(), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    values(static_cast<Eigen::Index>(i)) = found.values[i];
    vectors.col(static_cast<Eigen::Index>(i)) = found.vectors[i];
  }
}

}  // namespace

SimilarityGraph graph_from_weights(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "similarity matrix must be square");
  }
  SimilarityGraph g;
  g.weights = drop_diagonal(weights.sparseView());
  g.degrees = row_sums(g.weights);
  return g;
}

SimilarityGraph similarity_matrix(const Corpus& corpus) {
  if (corpus.size() == 0) throw Error(ErrorCode::kDegenerate, "empty corpus");
  auto x = corpus.feature_matrix();
  SparseMatrix xc(x);
  SparseMatrix xt = xc.transpose();
  SparseMatrix s = (xc * xt).pruned();
  SimilarityGraph g;
  g.weights = drop_diagonal(s);
  g.degrees = row_sums(g.weights);
  return g;
}

Laplacian normalized_laplacian(const SimilarityGraph& g) {
  Laplacian l;
  l.kind = LaplacianKind::kNormalized;
  l.n_documents = g.size();
  std::vector<Eigen::Index> position(g.size(), -1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.degrees(static_cast<Eigen::Index>(i)) > 0.0) {
      position[i] = static_cast<Eigen::Index>(l.active.size());
      l.active.push_back(i);
    } else {
      l.isolated.push_back(i);
    }
  }
  if (l.active.empty()) {
    throw Error(ErrorCode::kDegenerate, "every document is isolated in the similarity graph");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(g.weights.nonZeros()));
  for (int k = 0; k < g.weights.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it) {
      auto r = position[static_cast<std::size_t>(it.row())];
      auto c = position[static_cast<std::size_t>(it.col())];
      double v = it.value() / std::sqrt(g.degrees(it.row()) * g.degrees(it.col()));
      triplets.emplace_back(r, c, v);
    }
  }
  const auto n = static_cast<Eigen::Index>(l.active.size());
  l.matrix.resize(n, n);
  l.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return l;
}

SparseMatrix knn_sparsify(const SimilarityGraph& g, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "irm neighbor count must be at least 1");
  const std::size_t n = g.size();
  // Row lists; the matrix is symmetric so columns double as rows.
  std::vector<std::vector<std::pair<double, std::size_t>>> rows(n);
  for (int c = 0; c < g.weights.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) {
      if (it.value() > 0.0) {
        rows[static_cast<std::size_t>(it.row())].emplace_back(it.value(),
                                                              static_cast<std::size_t>(it.col()));
      }
    }
  }
  std::vector<std::vector<std::size_t>> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t t = 0; t < std::min(k, r.size()); ++t) nearest[i].push_back(r[t].second);
    std::sort(nearest[i].begin(), nearest[i].end());
  }
  auto ranks = [&](std::size_t i, std::size_t j) {
    return std::binary_search(nearest[i].begin(), nearest[i].end(), j);
  };
  std::vector<Eigen::Triplet<double>> triplets;
  for (int c = 0; c < g.weights.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) {
      auto i = static_cast<std::size_t>(it.row());
      auto j = static_cast<std::size_t>(it.col());
      if (ranks(i, j) || ranks(j, i)) triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  SparseMatrix out(g.weights.rows(), g.weights.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Laplacian irm_laplacian(const SimilarityGraph& g, std::size_t k) {
  SparseMatrix s = knn_sparsify(g, k);
  Eigen::VectorXd d = row_sums(s);
  const double d_max = d.size() > 0 ? d.maxCoeff() : 0.0;
  if (d_max <= 0.0) {
    throw Error(ErrorCode::kDegenerate, "similarity graph has no edges");
  }
  SparseMatrix diag(s.rows(), s.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < d.size(); ++i) triplets.emplace_back(i, i, d_max - d(i));
  diag.setFromTriplets(triplets.begin(), triplets.end());

  Laplacian l;
  l.kind = LaplacianKind::kInterestedReader;
  l.n_documents = g.size();
  l.active.resize(g.size());
  std::iota(l.active.begin(), l.active.end(), std::size_t{0});
  l.matrix = (s + diag) / d_max;
  l.matrix.prune(0.0);
  return l;
}

double max_residual(const Laplacian& l, const EigenBasis& basis) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < basis.eigenvectors.cols(); ++i) {
    Eigen::VectorXd e = basis.eigenvectors.col(i);
    worst = std::max(worst, (l.matrix * e - basis.eigenvalues(i) * e).norm());
  }
  return worst;
}

EigenBasis top_eigenpairs(const Laplacian& l, std::size_t m, const EigenSolverOptions& options) {
  const std::size_t n = l.active.size();
  if (m < 1 || m > n) {
    throw Error(ErrorCode::kInvalidArgument, "requested " + std::to_string(m) +
                                                 " eigenpairs from " + std::to_string(n) +
                                                 " active documents");
  }
  EigenBasis basis;
  basis.active = l.active;
  basis.isolated = l.isolated;
  basis.n_documents = l.n_documents;
  basis.kind = l.kind;
  basis.residual_tol = options.residual_tol;
  if (n <= options.dense_limit) {
    dense_top(l.matrix, m, basis.eigenvalues, basis.eigenvectors);
  } else {
    lanczos_top_m(l.matrix, m, options, basis.eigenvalues, basis.eigenvectors);
  }
  fix_signs(basis.eigenvectors);
  double worst = max_residual(l, basis);
  if (worst > options.residual_tol) {
    throw Error(ErrorCode::kNumeric,
                "eigenpair residual " + std::to_string(worst) + " exceeds tolerance");
  }
  return basis;
}

}  // namespace dimminer
