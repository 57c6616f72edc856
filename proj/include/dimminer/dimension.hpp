#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimminer/corpus.hpp"
#include "dimminer/margin_classifier.hpp"
#include "dimminer/spectral.hpp"

namespace dimminer {

enum class Polarity { kPositive, kNegative };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view name);
inline Polarity opposite(Polarity p) {
  return p == Polarity::kPositive ? Polarity::kNegative : Polarity::kPositive;
}

struct FeatureEntry {
  std::string term;
  double weight = 0.0;

  bool operator==(const FeatureEntry&) const = default;
};

struct FeatureList {
  std::vector<FeatureEntry> entries;
  std::optional<Polarity> polarity_label;

  std::size_t size() const { return entries.size(); }
  std::vector<std::string> terms() const;
};

// One eigenvector summarized for inspection. list_c1 characterizes the
// top-of-eigenvector documents (trained as +1), list_c2 the bottom.
struct DimensionProfile {
  int eig_index = 0;
  std::vector<std::string> unambiguous_top;
  std::vector<std::string> unambiguous_bottom;
  FeatureList list_c1;
  FeatureList list_c2;
  double training_accuracy = 0.0;
  std::optional<MarginModel> model;  // absent when loaded from JSON
  std::vector<std::string> warnings;
};

struct ProfileOptions {
  std::size_t f_count = 100;
  double c_param = 1.0;
  double unambiguous_fraction = 0.25;
};

// Row positions (into the eigenvector) of the two unambiguous groups.
struct UnambiguousSplit {
  std::vector<std::size_t> top;
  std::vector<std::size_t> bottom;
};

inline constexpr std::size_t kMinUnambiguousDocuments = 16;

// Sorts by value descending, ties by ascending id, and keeps
// floor(n * fraction / 2) rows from each end.
UnambiguousSplit select_unambiguous(std::span<const double> values,
                                    std::span<const std::string> ids,
                                    double fraction = 0.25);

// Top-F positive-weight and most-negative-weight terms; zero weights never
// qualify; ties by ascending term.
std::pair<FeatureList, FeatureList> mmfr(const MarginModel& model, const Vocabulary& vocabulary,
                                         std::size_t f_count,
                                         std::vector<std::string>* warnings = nullptr);

DimensionProfile build_profile(const Corpus& corpus, const EigenBasis& basis, int eig_index,
                               const ProfileOptions& options = {});

// One profile per eigenvector 2..m.
std::vector<DimensionProfile> build_profiles(const Corpus& corpus, const EigenBasis& basis,
                                             const ProfileOptions& options = {});

}  // namespace dimminer
