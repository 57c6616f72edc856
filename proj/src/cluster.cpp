#include "dimminer/cluster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "dimminer/error.hpp"
#include "dimminer/random.hpp"

namespace dimminer {

std::size_t Partition::cluster_size(int cluster) const {
  return static_cast<std::size_t>(std::count(assign.begin(), assign.end(), cluster));
}

namespace {

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index row,
                        const Eigen::RowVectorXd& centroid) {
  return (points.row(row) - centroid).squaredNorm();
}

void update_centroids(const Eigen::MatrixXd& points, const std::vector<int>& assign,
                      std::array<Eigen::RowVectorXd, 2>& centroids, std::array<std::size_t, 2>& counts) {
  for (int c = 0; c < 2; ++c) {
    centroids[c] = Eigen::RowVectorXd::Zero(points.cols());
    counts[c] = 0;
  }
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    auto c = assign[static_cast<std::size_t>(r)];
    centroids[c] += points.row(r);
    ++counts[c];
  }
  for (int c = 0; c < 2; ++c) {
    if (counts[c] > 0) centroids[c] /= static_cast<double>(counts[c]);
  }
}

double total_sse(const Eigen::MatrixXd& points, const std::vector<int>& assign,
                 const std::array<Eigen::RowVectorXd, 2>& centroids) {
  double sse = 0.0;
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    sse += squared_distance(points, r, centroids[assign[static_cast<std::size_t>(r)]]);
  }
  return sse;
}

// Cluster of the first row becomes 0 so equal partitions compare equal.
void canonical_labels(std::vector<int>& assign) {
  if (!assign.empty() && assign.front() == 1) {
    for (auto& a : assign) a = 1 - a;
  }
}

Partition expand(const Embedding& emb, const std::vector<int>& row_assign, std::string provenance,
                 std::vector<std::string>* warnings) {
  Partition p;
  p.provenance = std::move(provenance);
  p.assign.assign(emb.n_documents, 0);
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t r = 0; r < row_assign.size(); ++r) {
    p.assign[emb.row_documents[r]] = row_assign[r];
    ++counts[row_assign[r]];
  }
  const int larger = counts[1] > counts[0] ? 1 : 0;
  for (auto doc : emb.isolated) p.assign[doc] = larger;
  if (!emb.isolated.empty() && warnings != nullptr) {
    warnings->push_back(std::to_string(emb.isolated.size()) +
                        " isolated document(s) assigned to the larger cluster");
  }
  return p;
}

}  // namespace

Embedding embed(const EigenBasis& basis, std::span<const int> indices) {
  if (indices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one eigenvector index is required");
  }
  std::vector<int> seen;
  for (int idx : indices) {
    if (idx < 1 || static_cast<std::size_t>(idx) > basis.m()) {
      throw Error(ErrorCode::kInvalidArgument, "eigenvector index " + std::to_string(idx) +
                                                   " outside 1.." + std::to_string(basis.m()));
    }
    if (std::find(seen.begin(), seen.end(), idx) != seen.end()) {
      throw Error(ErrorCode::kInvalidArgument, "eigenvector index " + std::to_string(idx) +
                                                   " selected twice");
    }
    seen.push_back(idx);
  }
  Embedding emb;
  emb.source_eig_indices.assign(indices.begin(), indices.end());
  emb.row_documents = basis.active;
  emb.isolated = basis.isolated;
  emb.n_documents = basis.n_documents;
  const auto rows = static_cast<Eigen::Index>(basis.n_active());
  emb.points.resize(rows, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    emb.points.col(static_cast<Eigen::Index>(c)) =
        basis.eigenvectors.col(static_cast<Eigen::Index>(indices[c] - 1));
  }
  emb.row_normalized = indices.size() >= 2;
  if (emb.row_normalized) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      double norm = emb.points.row(r).norm();
      if (norm > 0.0) emb.points.row(r) /= norm;
    }
  }
  return emb;
}

LloydResult lloyd_two_means(const Eigen::MatrixXd& points, std::size_t seed_a, std::size_t seed_b,
                            std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::array<Eigen::RowVectorXd, 2> centroids{points.row(static_cast<Eigen::Index>(seed_a)),
                                              points.row(static_cast<Eigen::Index>(seed_b))};
  std::array<std::size_t, 2> counts{0, 0};
  LloydResult result;
  result.assign.assign(n, -1);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t r = 0; r < n; ++r) {
      auto row = static_cast<Eigen::Index>(r);
      double d0 = squared_distance(points, row, centroids[0]);
      double d1 = squared_distance(points, row, centroids[1]);
      int c = d1 < d0 ? 1 : 0;
      if (c != result.assign[r]) {
        result.assign[r] = c;
        changed = true;
      }
    }
    if (!changed) break;
    update_centroids(points, result.assign, centroids, counts);
    for (int c = 0; c < 2; ++c) {
      if (counts[c] != 0) continue;
      // Move the point farthest from the surviving centroid into the empty cluster.
      const int other = 1 - c;
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        double d = squared_distance(points, static_cast<Eigen::Index>(r), centroids[other]);
        if (d > best) {
          best = d;
          far = r;
        }
      }
      result.assign[far] = c;
      update_centroids(points, result.assign, centroids, counts);
    }
    result.sse_history.push_back(total_sse(points, result.assign, centroids));
    ++result.iterations;
  }
  update_centroids(points, result.assign, centroids, counts);
  result.sse = total_sse(points, result.assign, centroids);
  return result;
}

ClusterRun two_means(const Embedding& emb, std::size_t runs, std::uint64_t base_seed) {
  const auto n = static_cast<std::size_t>(emb.points.rows());
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "two_means needs at least two points");
  if (runs < 1) throw Error(ErrorCode::kInvalidArgument, "two_means needs at least one run");

  ClusterRun out;
  out.runs = runs;
  out.base_seed = base_seed;
  std::string dims;
  for (auto i : emb.source_eig_indices) dims += (dims.empty() ? "e" : ",e") + std::to_string(i);

  for (std::size_t run = 0; run < runs; ++run) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    const std::size_t first = uniform_index(rng, n);
    std::vector<std::size_t> distinct;
    for (std::size_t r = 0; r < n; ++r) {
      if (emb.points.row(static_cast<Eigen::Index>(r)) != emb.points.row(static_cast<Eigen::Index>(first))) {
        distinct.push_back(r);
      }
    }
    if (distinct.empty()) {
      throw Error(ErrorCode::kDegenerate, "all embedded points are identical");
    }
    const std::size_t second = distinct[uniform_index(rng, distinct.size())];
    auto lloyd = lloyd_two_means(emb.points, first, second);
    canonical_labels(lloyd.assign);
    out.per_run_sse.push_back(lloyd.sse);
    out.per_run_partitions.push_back(
        expand(emb, lloyd.assign, "2-means on " + dims + " run " + std::to_string(run), nullptr));
  }
  out.canonical_run = static_cast<std::size_t>(
      std::min_element(out.per_run_sse.begin(), out.per_run_sse.end()) - out.per_run_sse.begin());
  out.canonical = out.per_run_partitions[out.canonical_run];
  out.canonical.provenance = "2-means on " + dims + " (best of " + std::to_string(runs) + " runs)";
  if (!emb.isolated.empty()) {
    out.warnings.push_back(std::to_string(emb.isolated.size()) +
                           " isolated document(s) assigned to the larger cluster");
    spdlog::warn("{}", out.warnings.back());
  }
  return out;
}

double cut_value(const Partition& p, const SimilarityGraph& g) {
  if (p.size() != g.size()) {
    throw Error(ErrorCode::kInvalidArgument, "partition and graph sizes differ");
  }
  double twice = 0.0;
  for (int k = 0; k < g.weights.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it) {
      if (p.assign[static_cast<std::size_t>(it.row())] != p.assign[static_cast<std::size_t>(it.col())]) {
        twice += it.value();
      }
    }
  }
  return twice / 2.0;
}

double ncut_value(const Partition& p, const SimilarityGraph& g) {
  const double cut = cut_value(p, g);
  std::array<double, 2> assoc{0.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    assoc[p.assign[i] == 0 ? 0 : 1] += g.degrees(static_cast<Eigen::Index>(i));
  }
  if (assoc[0] <= 0.0 || assoc[1] <= 0.0) {
    throw Error(ErrorCode::kUndefined, "normalized cut undefined for a zero-degree cluster");
  }
  return cut / assoc[0] + cut / assoc[1];
}

Partition threshold_split(const EigenBasis& basis, const SimilarityGraph& g) {
  if (basis.m() < 2) throw Error(ErrorCode::kInvalidArgument, "threshold split needs e_2");
  if (basis.n_documents != g.size()) {
    throw Error(ErrorCode::kInvalidArgument, "basis and graph cover different documents");
  }
  const std::size_t n = basis.n_active();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "threshold split needs two active documents");
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto doc = static_cast<Eigen::Index>(basis.active[r]);
    const double d = g.degrees(doc);
    y[r] = d > 0.0 ? basis.eigenvectors(static_cast<Eigen::Index>(r), 1) / std::sqrt(d) : 0.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] > y[b]; });

  // Move documents one at a time from side 1 to side 0, updating cut and assoc.
  std::vector<int> side(g.size(), 1);
  double total = g.degrees.sum();
  double assoc0 = 0.0;
  double cut = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto doc = static_cast<Eigen::Index>(basis.active[order[k]]);
    for (SparseMatrix::InnerIterator it(g.weights, doc); it; ++it) {
      if (it.row() == doc) continue;
      cut += side[static_cast<std::size_t>(it.row())] == 1 ? it.value() : -it.value();
    }
    side[static_cast<std::size_t>(doc)] = 0;
    assoc0 += g.degrees(doc);
    const double assoc1 = total - assoc0;
    if (assoc0 <= 0.0 || assoc1 <= 0.0) continue;
    const double ncut = cut / assoc0 + cut / assoc1;
    if (ncut < best) {
      best = ncut;
      best_k = k + 1;
    }
  }
  Partition p;
  p.assign.assign(basis.n_documents, 1);
  for (std::size_t k = 0; k < best_k; ++k) p.assign[basis.active[order[k]]] = 0;
  const int larger = best_k * 2 >= n ? 0 : 1;
  for (auto doc : basis.isolated) p.assign[doc] = larger;
  if (p.assign[0] != 0) {
    for (auto& a : p.assign) a = 1 - a;
  }
  p.provenance = "threshold-split e2";
  return p;
}

}  // namespace dimminer
