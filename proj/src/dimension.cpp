#include "dimminer/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "dimminer/error.hpp"

namespace dimminer {

std::string_view to_string(Polarity p) {
  return p == Polarity::kPositive ? "POSITIVE" : "NEGATIVE";
}

Polarity parse_polarity(std::string_view name) {
  if (name == "POSITIVE" || name == "positive") return Polarity::kPositive;
  if (name == "NEGATIVE" || name == "negative") return Polarity::kNegative;
  throw Error(ErrorCode::kInvalidArgument, "unknown polarity '" + std::string(name) + "'");
}

std::vector<std::string> FeatureList::terms() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.term);
  return out;
}

UnambiguousSplit select_unambiguous(std::span<const double> values,
                                    std::span<const std::string> ids, double fraction) {
  const std::size_t n = values.size();
  if (ids.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "eigenvector and id counts differ");
  }
  if (n < kMinUnambiguousDocuments) {
    throw Error(ErrorCode::kInvalidArgument,
                "unambiguous selection needs at least 16 documents, got " + std::to_string(n));
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "unambiguous fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] > values[b] : ids[a] < ids[b];
  });
  const auto per_side = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * fraction / 2.0 + 1e-9));
  UnambiguousSplit split;
  split.top.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(per_side));
  split.bottom.assign(order.end() - static_cast<std::ptrdiff_t>(per_side), order.end());
  return split;
}

std::pair<FeatureList, FeatureList> mmfr(const MarginModel& model, const Vocabulary& vocabulary,
                                         std::size_t f_count, std::vector<std::string>* warnings) {
  if (model.weights.size() != vocabulary.size()) {
    throw Error(ErrorCode::kInvalidArgument, "model weights do not match the vocabulary");
  }
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
  for (std::size_t t = 0; t < model.weights.size(); ++t) {
    if (model.weights[t] > 0.0) positive.push_back(t);
    if (model.weights[t] < 0.0) negative.push_back(t);
  }
  auto by_weight = [&](bool descending) {
    return [&, descending](std::size_t a, std::size_t b) {
      double wa = model.weights[a];
      double wb = model.weights[b];
      if (wa != wb) return descending ? wa > wb : wa < wb;
      return vocabulary.terms[a] < vocabulary.terms[b];
    };
  };
  std::sort(positive.begin(), positive.end(), by_weight(true));
  std::sort(negative.begin(), negative.end(), by_weight(false));

  auto take = [&](const std::vector<std::size_t>& ranked, const char* side) {
    FeatureList list;
    for (std::size_t r = 0; r < std::min(f_count, ranked.size()); ++r) {
      list.entries.push_back({vocabulary.terms[ranked[r]], model.weights[ranked[r]]});
    }
    if (list.size() < f_count && warnings != nullptr) {
      warnings->push_back(std::string(side) + " list has " + std::to_string(list.size()) +
                          " of " + std::to_string(f_count) + " requested features");
    }
    return list;
  };
  return {take(positive, "c1"), take(negative, "c2")};
}

DimensionProfile build_profile(const Corpus& corpus, const EigenBasis& basis, int eig_index,
                               const ProfileOptions& options) {
  const Eigen::VectorXd e = basis.vector(static_cast<std::size_t>(eig_index));
  std::vector<double> values(e.data(), e.data() + e.size());
  std::vector<std::string> ids;
  ids.reserve(basis.n_active());
  for (auto doc : basis.active) ids.push_back(corpus.document(doc).id);

  auto split = select_unambiguous(values, ids, options.unambiguous_fraction);

  DimensionProfile profile;
  profile.eig_index = eig_index;
  std::vector<SparseBinaryVector> vectors;
  std::vector<int> labels;
  for (auto r : split.top) {
    profile.unambiguous_top.push_back(ids[r]);
    vectors.push_back(corpus.document(basis.active[r]).features);
    labels.push_back(1);
  }
  for (auto r : split.bottom) {
    profile.unambiguous_bottom.push_back(ids[r]);
    vectors.push_back(corpus.document(basis.active[r]).features);
    labels.push_back(-1);
  }
  profile.model = train_margin_classifier(vectors, labels, corpus.vocabulary().size(), options.c_param);
  profile.training_accuracy = profile.model->training_accuracy;
  auto [c1, c2] = mmfr(*profile.model, corpus.vocabulary(), options.f_count, &profile.warnings);
  profile.list_c1 = std::move(c1);
  profile.list_c2 = std::move(c2);
  for (const auto& w : profile.warnings) spdlog::warn("e{}: {}", eig_index, w);
  return profile;
}

std::vector<DimensionProfile> build_profiles(const Corpus& corpus, const EigenBasis& basis,
                                             const ProfileOptions& options) {
  if (basis.m() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "profiles need at least two eigenvectors");
  }
  std::vector<DimensionProfile> profiles;
  for (std::size_t i = 2; i <= basis.m(); ++i) {
    profiles.push_back(build_profile(corpus, basis, static_cast<int>(i), options));
  }
  return profiles;
}

}  // namespace dimminer
