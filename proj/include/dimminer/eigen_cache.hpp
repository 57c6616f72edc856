#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dimminer/spectral.hpp"

namespace dimminer {

// On-disk EigenBasis: versioned header followed by little-endian IEEE-754
// doubles (eigenvalues, then eigenvectors column by column).
inline constexpr std::uint32_t kEigenCacheVersion = 1;

std::string eigen_cache_key(const std::string& corpus_hash, LaplacianKind kind, std::size_t m,
                            std::size_t irm_k);

void write_eigen_basis(std::ostream& out, const EigenBasis& basis);
EigenBasis read_eigen_basis(std::istream& in);

class EigenCache {
 public:
  explicit EigenCache(std::filesystem::path dir);

  std::filesystem::path path_for(const std::string& key) const;
  std::optional<EigenBasis> load(const std::string& key) const;
  void store(const std::string& key, const EigenBasis& basis) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace dimminer
