#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dimminer/eigen_cache.hpp"
#include "dimminer/error.hpp"
#include "dimminer/spectral.hpp"
#include "../support/oracles.hpp"

using namespace dimminer;
using dimminer::testing::jacobi_eigen;
using dimminer::testing::random_connected_graph;
using dimminer::testing::to_eigen;

namespace {

Corpus small_corpus(std::vector<std::string> texts) {
  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({"d" + std::to_string(i), texts[i], {}, {}});
  return build_corpus(docs, Representation::kBoaw);
}

Eigen::MatrixXd two_cliques() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 4);
  s(0, 1) = s(1, 0) = 1.0;
  s(2, 3) = s(3, 2) = 1.0;
  return s;
}

}  // namespace

TEST_CASE("similarity counts shared terms with a zero diagonal") {
  auto c = small_corpus({"aa bb cc", "bb cc dd", "ee ff", "ee ff aa dd"});
  auto g = similarity_matrix(c);
  Eigen::MatrixXd s(g.weights);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 2.0);
  CHECK(s(0, 2) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(s(i, i) == 0.0);
  CHECK((s - s.transpose()).norm() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(g.degrees(i) == s.row(i).sum());
}

TEST_CASE("normalized laplacian of the exchange graph") {
  Eigen::MatrixXd s(2, 2);
  s << 0, 2, 2, 0;
  auto l = normalized_laplacian(graph_from_weights(s));
  Eigen::MatrixXd m(l.matrix);
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(0, 0) == 0.0);
  auto basis = top_eigenpairs(l, 2);
  CHECK(basis.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(basis.eigenvalues(1) == doctest::Approx(-1.0));
  CHECK(basis.eigenvectors(0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(basis.eigenvectors(1, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(std::abs(basis.eigenvectors(0, 1)) == doctest::Approx(std::sqrt(0.5)));
  CHECK(basis.eigenvectors(0, 1) == doctest::Approx(-basis.eigenvectors(1, 1)));
}

TEST_CASE("isolated documents are excluded from the laplacian") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 2) = s(2, 0) = 3.0;
  auto l = normalized_laplacian(graph_from_weights(s));
  CHECK(l.active == std::vector<std::size_t>{0, 2});
  CHECK(l.isolated == std::vector<std::size_t>{1});
  CHECK(l.matrix.rows() == 2);

  Eigen::MatrixXd none = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(normalized_laplacian(graph_from_weights(none)), Error);
}

TEST_CASE("two disconnected cliques: eigenvalue 1 twice, e2 splits the components") {
  auto l = normalized_laplacian(graph_from_weights(two_cliques()));
  auto oracle = jacobi_eigen({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
  CHECK(oracle.values[0] == doctest::Approx(1.0));
  CHECK(oracle.values[1] == doctest::Approx(1.0));
  auto basis = top_eigenpairs(l, 2);
  CHECK(basis.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(basis.eigenvalues(1) == doctest::Approx(1.0));
  // Tied spectrum: check membership in the span of the two component indicators.
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd e = basis.eigenvectors.col(k);
    CHECK(e(0) == doctest::Approx(e(1)));
    CHECK(e(2) == doctest::Approx(e(3)));
  }
}

TEST_CASE("eigenbasis invariants on random connected graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = random_connected_graph(30 + 10 * trial, 0.15, rng);
    auto g = graph_from_weights(to_eigen(s));
    auto l = normalized_laplacian(g);
    auto basis = top_eigenpairs(l, 5);
    Eigen::MatrixXd gram = basis.eigenvectors.transpose() * basis.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(max_residual(l, basis) <= basis.residual_tol);
    for (int i = 0; i + 1 < 5; ++i) CHECK(basis.eigenvalues(i) >= basis.eigenvalues(i + 1));
    for (int i = 0; i < 5; ++i) CHECK(std::abs(basis.eigenvalues(i)) <= 1.0 + 1e-9);
    // e1 is D^{1/2} 1 normalized.
    Eigen::VectorXd root = g.degrees.cwiseSqrt();
    root.normalize();
    CHECK((basis.eigenvectors.col(0) - root).cwiseAbs().maxCoeff() < 1e-8);
    // Sign convention.
    for (int c = 0; c < 5; ++c) {
      Eigen::Index arg;
      basis.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(basis.eigenvectors(arg, c) > 0.0);
    }
    // Eigenvalues agree with the Jacobi oracle.
    auto oracle = jacobi_eigen([&] {
      Eigen::MatrixXd m(l.matrix);
      std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
      return rows;
    }());
    for (int i = 0; i < 5; ++i) CHECK(basis.eigenvalues(i) == doctest::Approx(oracle.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("rayleigh quotient of vectors orthogonal to e1 never exceeds lambda2") {
  std::mt19937_64 rng(5);
  auto s = random_connected_graph(40, 0.2, rng);
  auto l = normalized_laplacian(graph_from_weights(to_eigen(s)));
  auto basis = top_eigenpairs(l, 2);
  Eigen::VectorXd e1 = basis.eigenvectors.col(0);
  const double lambda2 = basis.eigenvalues(1);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd g(e1.size());
    for (int i = 0; i < g.size(); ++i) g(i) = normal(rng);
    g -= g.dot(e1) * e1;
    g.normalize();
    CHECK(g.dot(l.matrix * g) <= lambda2 + 1e-9);
  }
  Eigen::VectorXd e2 = basis.eigenvectors.col(1);
  CHECK(e2.dot(l.matrix * e2) == doctest::Approx(lambda2).epsilon(1e-12));
}

TEST_CASE("decomposition is deterministic to the byte") {
  std::mt19937_64 rng(3);
  auto l = normalized_laplacian(graph_from_weights(to_eigen(random_connected_graph(60, 0.1, rng))));
  std::ostringstream a, b;
  write_eigen_basis(a, top_eigenpairs(l, 5));
  write_eigen_basis(b, top_eigenpairs(l, 5));
  CHECK(a.str() == b.str());
}

TEST_CASE("lanczos path agrees with the dense path") {
  std::mt19937_64 rng(9);
  EigenSolverOptions lanczos;
  lanczos.dense_limit = 0;
  SUBCASE("connected graph") {
    auto l = normalized_laplacian(graph_from_weights(to_eigen(random_connected_graph(120, 0.05, rng))));
    auto dense = top_eigenpairs(l, 5);
    auto iterative = top_eigenpairs(l, 5, lanczos);
    for (int i = 0; i < 5; ++i) {
      CHECK(iterative.eigenvalues(i) == doctest::Approx(dense.eigenvalues(i)).epsilon(1e-9));
      CHECK(std::abs(iterative.eigenvectors.col(i).dot(dense.eigenvectors.col(i))) ==
            doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(max_residual(l, iterative) <= 1e-8);
    std::ostringstream a, b;
    write_eigen_basis(a, iterative);
    write_eigen_basis(b, top_eigenpairs(l, 5, lanczos));
    CHECK(a.str() == b.str());
  }
  SUBCASE("disconnected graph recovers the repeated eigenvalue") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(40, 40);
    auto a = random_connected_graph(20, 0.2, rng);
    auto b = random_connected_graph(20, 0.2, rng);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        s(i, j) = a[i][j];
        s(20 + i, 20 + j) = b[i][j];
      }
    auto l = normalized_laplacian(graph_from_weights(s));
    auto iterative = top_eigenpairs(l, 3, lanczos);
    CHECK(iterative.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(iterative.eigenvalues(1) == doctest::Approx(1.0));
    auto dense = top_eigenpairs(l, 3);
    CHECK(iterative.eigenvalues(2) == doctest::Approx(dense.eigenvalues(2)).epsilon(1e-9));
  }
}

TEST_CASE("top_eigenpairs rejects bad counts") {
  Eigen::MatrixXd s(2, 2);
  s << 0, 1, 1, 0;
  auto l = normalized_laplacian(graph_from_weights(s));
  CHECK_THROWS_AS(top_eigenpairs(l, 0), Error);
  CHECK_THROWS_AS(top_eigenpairs(l, 3), Error);
}

TEST_CASE("irm laplacian") {
  SUBCASE("equal degrees cancel") {
    Eigen::MatrixXd s(2, 2);
    s << 0, 2, 2, 0;
    auto l = irm_laplacian(graph_from_weights(s), 1);
    Eigen::MatrixXd m(l.matrix);
    CHECK(m(0, 0) == doctest::Approx(0.0));
    CHECK(m(0, 1) == doctest::Approx(1.0));
    CHECK(m(1, 1) == doctest::Approx(0.0));
  }
  SUBCASE("k-NN keep rule on three nodes") {
    // Pairs: (0,1)=5, (0,2)=3, (1,2)=1. Top-1 lists: 0->1, 1->0, 2->0.
    Eigen::MatrixXd s(3, 3);
    s << 0, 5, 3, 5, 0, 1, 3, 1, 0;
    auto g = graph_from_weights(s);
    Eigen::MatrixXd kept(knn_sparsify(g, 1));
    CHECK(kept(0, 1) == 5.0);
    CHECK(kept(0, 2) == 3.0);  // 2 ranks 0 first
    CHECK(kept(1, 2) == 0.0);  // neither ranks the other
    CHECK((kept - kept.transpose()).norm() == 0.0);
    auto l = irm_laplacian(g, 1);
    Eigen::MatrixXd m(l.matrix);
    // degrees 8, 5, 3; d_max 8.
    CHECK(m(0, 0) == doctest::Approx(0.0));
    CHECK(m(1, 1) == doctest::Approx(3.0 / 8.0));
    CHECK(m(2, 2) == doctest::Approx(5.0 / 8.0));
    CHECK(m(0, 1) == doctest::Approx(5.0 / 8.0));
    auto basis = top_eigenpairs(l, 1);
    CHECK(basis.eigenvalues(0) == doctest::Approx(1.0));
  }
  SUBCASE("large k keeps every edge, sparsified graphs stay symmetric") {
    std::mt19937_64 rng(2);
    auto g = graph_from_weights(to_eigen(random_connected_graph(25, 0.3, rng)));
    Eigen::MatrixXd full(knn_sparsify(g, 24));
    CHECK((full - Eigen::MatrixXd(g.weights)).norm() == 0.0);
    for (std::size_t k : {1, 2, 3, 5}) {
      Eigen::MatrixXd kept(knn_sparsify(g, k));
      CHECK((kept - kept.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("eigen cache round trip") {
  std::mt19937_64 rng(4);
  auto l = normalized_laplacian(graph_from_weights(to_eigen(random_connected_graph(30, 0.2, rng))));
  auto basis = top_eigenpairs(l, 4);
  std::stringstream buf;
  write_eigen_basis(buf, basis);
  auto back = read_eigen_basis(buf);
  CHECK(back.eigenvalues == basis.eigenvalues);
  CHECK(back.eigenvectors == basis.eigenvectors);
  CHECK(back.active == basis.active);
  CHECK(back.n_documents == basis.n_documents);

  std::string bytes = buf.str();
  CHECK(bytes.substr(0, 7) == "DMEIGEN");
  // First eigenvalue, little-endian, sits after the fixed header and index arrays.
  std::istringstream bad("not a cache");
  CHECK_THROWS_AS(read_eigen_basis(bad), Error);

  CHECK(eigen_cache_key("h", LaplacianKind::kNormalized, 5, 0) !=
        eigen_cache_key("h", LaplacianKind::kNormalized, 4, 0));
  CHECK(eigen_cache_key("h", LaplacianKind::kInterestedReader, 5, 10) !=
        eigen_cache_key("h", LaplacianKind::kInterestedReader, 5, 20));
}
