#include "dimminer/margin_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "dimminer/error.hpp"

namespace dimminer {

double MarginModel::decision_value(const SparseBinaryVector& x) const {
  double s = 0.0;
  for (auto c : x) {
    if (c < weights.size()) s += weights[c];
  }
  return s - bias;
}

namespace {

constexpr double kTau = 1e-12;

std::size_t shared_terms(const SparseBinaryVector& a, const SparseBinaryVector& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

// Binary features make the linear kernel an exact integer count.
Eigen::MatrixXf gram_matrix(std::span<const SparseBinaryVector> vectors) {
  const auto n = static_cast<Eigen::Index>(vectors.size());
  Eigen::MatrixXf k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      auto v = static_cast<float>(shared_terms(vectors[static_cast<std::size_t>(i)],
                                               vectors[static_cast<std::size_t>(j)]));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace

MarginFit fit_margin_classifier(std::span<const SparseBinaryVector> vectors,
                                std::span<const int> labels, std::size_t n_features,
                                const MarginTrainingOptions& options) {
  const std::size_t n = vectors.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "vector and label counts differ");
  }
  if (!(options.c_param > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "regularization constant C must be positive");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) {
    if (y == 1) {
      has_pos = true;
    } else if (y == -1) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kDegenerate, "margin classifier needs both classes");
  }
  for (const auto& v : vectors) {
    if (!v.empty() && v.back() >= n_features) {
      throw Error(ErrorCode::kInvalidArgument, "feature index outside the vocabulary");
    }
  }

  const double c = options.c_param;
  const Eigen::MatrixXf k = gram_matrix(vectors);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  std::vector<double> y(labels.begin(), labels.end());

  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto q = [&](std::size_t a, std::size_t b) {
    return y[a] * y[b] * static_cast<double>(k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  };
  auto qd = [&](std::size_t a) {
    return static_cast<double>(k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)));
  };

  MarginFit fit;
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    // Working set: maximal violating i, then j by second-order gain.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const auto ui = static_cast<std::size_t>(i);
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] > 0) {
          if (lower(t)) continue;
          double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (diff > 0) {
            double quad = qd(ui) + qd(t) - 2.0 * y[ui] * q(ui, t);
            double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) {
              best_obj = obj;
              j = static_cast<std::ptrdiff_t>(t);
            }
          }
        } else {
          if (upper(t)) continue;
          double diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (diff > 0) {
            double quad = qd(ui) + qd(t) + 2.0 * y[ui] * q(ui, t);
            double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) {
              best_obj = obj;
              j = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < options.tolerance) break;

    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(j);
    const double old_a = alpha[a];
    const double old_b = alpha[b];
    const double qab = q(a, b);
    if (y[a] != y[b]) {
      double quad = qd(a) + qd(b) + 2.0 * qab;
      if (quad <= 0) quad = kTau;
      double delta = (-grad[a] - grad[b]) / quad;
      double diff = alpha[a] - alpha[b];
      alpha[a] += delta;
      alpha[b] += delta;
      if (diff > 0) {
        if (alpha[b] < 0) {
          alpha[b] = 0;
          alpha[a] = diff;
        }
      } else if (alpha[a] < 0) {
        alpha[a] = 0;
        alpha[b] = -diff;
      }
      if (diff > 0) {
        if (alpha[a] > c) {
          alpha[a] = c;
          alpha[b] = c - diff;
        }
      } else if (alpha[b] > c) {
        alpha[b] = c;
        alpha[a] = c + diff;
      }
    } else {
      double quad = qd(a) + qd(b) - 2.0 * qab;
      if (quad <= 0) quad = kTau;
      double delta = (grad[a] - grad[b]) / quad;
      double sum = alpha[a] + alpha[b];
      alpha[a] -= delta;
      alpha[b] += delta;
      if (sum > c) {
        if (alpha[a] > c) {
          alpha[a] = c;
          alpha[b] = sum - c;
        }
      } else if (alpha[b] < 0) {
        alpha[b] = 0;
        alpha[a] = sum;
      }
      if (sum > c) {
        if (alpha[b] > c) {
          alpha[b] = c;
          alpha[a] = sum - c;
        }
      } else if (alpha[a] < 0) {
        alpha[a] = 0;
        alpha[b] = sum;
      }
    }
    const double da = alpha[a] - old_a;
    const double db = alpha[b] - old_b;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(a, t) * da + q(b, t) * db;
  }
  if (iter >= options.max_iterations) {
    throw Error(ErrorCode::kNumeric, "margin classifier did not converge within the iteration cap");
  }

  // Bias from free support vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  fit.model.c_param = c;
  fit.model.bias = rho;
  fit.model.weights.assign(n_features, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] == 0.0) continue;
    for (auto col : vectors[t]) fit.model.weights[col] += alpha[t] * y[t];
  }
  std::size_t correct = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (fit.model.predict(vectors[t]) == labels[t]) ++correct;
  }
  fit.model.training_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  fit.alpha = std::move(alpha);
  fit.iterations = iter;
  return fit;
}

MarginModel train_margin_classifier(std::span<const SparseBinaryVector> vectors,
                                    std::span<const int> labels, std::size_t n_features,
                                    double c_param) {
  MarginTrainingOptions options;
  options.c_param = c_param;
  return fit_margin_classifier(vectors, labels, n_features, options).model;
}

double max_kkt_violation(const MarginFit& fit, std::span<const SparseBinaryVector> vectors,
                         std::span<const int> labels) {
  const double c = fit.model.c_param;
  const double eps = 1e-12 * std::max(1.0, c);
  double worst = 0.0;
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    double margin = labels[t] * fit.model.decision_value(vectors[t]);
    double a = fit.alpha[t];
    double v;
    if (a <= eps) {
      v = std::max(0.0, 1.0 - margin);
    } else if (a >= c - eps) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace dimminer
