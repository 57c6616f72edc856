#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dimminer/corpus.hpp"

namespace dimminer {

// Linear soft-margin classifier: sign(w . x - b).
struct MarginModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c_param = 1.0;
  double training_accuracy = 0.0;

  double decision_value(const SparseBinaryVector& x) const;
  int predict(const SparseBinaryVector& x) const { return decision_value(x) > 0.0 ? 1 : -1; }
};

struct MarginTrainingOptions {
  double c_param = 1.0;
  // Maximal violating pair gap at which SMO stops.
  double tolerance = 1e-5;
  std::size_t max_iterations = 20'000'000;
};

struct MarginFit {
  MarginModel model;
  std::vector<double> alpha;  // dual coefficients, 0 <= alpha_i <= C
  std::size_t iterations = 0;
};

// Solves min 1/2 |w|^2 + C sum xi_i  s.t.  y_i (w . x_i - b) >= 1 - xi_i
// through its dual with SMO and second-order working-set selection.
MarginFit fit_margin_classifier(std::span<const SparseBinaryVector> vectors,
                                std::span<const int> labels, std::size_t n_features,
                                const MarginTrainingOptions& options);

MarginModel train_margin_classifier(std::span<const SparseBinaryVector> vectors,
                                    std::span<const int> labels, std::size_t n_features,
                                    double c_param = 1.0);

// Largest per-point violation of the soft-margin KKT conditions.
double max_kkt_violation(const MarginFit& fit, std::span<const SparseBinaryVector> vectors,
                         std::span<const int> labels);

}  // namespace dimminer
