#include "dimminer/eigen_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dimminer/error.hpp"
#include "dimminer/hash.hpp"

namespace dimminer {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'M', 'E', 'I', 'G', 'E', 'N', '\0'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw Error(ErrorCode::kParse, "eigen cache truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw Error(ErrorCode::kParse, "eigen cache truncated");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

std::string eigen_cache_key(const std::string& corpus_hash, LaplacianKind kind, std::size_t m,
                            std::size_t irm_k) {
  ContentHasher h;
  h.field(corpus_hash).field(to_string(kind)).field(static_cast<std::uint64_t>(m));
  if (kind == LaplacianKind::kInterestedReader) h.field(static_cast<std::uint64_t>(irm_k));
  h.field(static_cast<std::uint64_t>(kEigenCacheVersion));
  return h.hex_digest();
}

void write_eigen_basis(std::ostream& out, const EigenBasis& basis) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kEigenCacheVersion);
  put_u32(out, basis.kind == LaplacianKind::kNormalized ? 0u : 1u);
  put_u64(out, basis.n_documents);
  put_u64(out, basis.active.size());
  put_u64(out, basis.isolated.size());
  put_u64(out, basis.m());
  put_f64(out, basis.residual_tol);
  for (auto i : basis.active) put_u64(out, i);
  for (auto i : basis.isolated) put_u64(out, i);
  for (Eigen::Index i = 0; i < basis.eigenvalues.size(); ++i) put_f64(out, basis.eigenvalues(i));
  for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.eigenvectors.rows(); ++r) {
      put_f64(out, basis.eigenvectors(r, c));
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing eigen cache");
}

EigenBasis read_eigen_basis(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::kParse, "not an eigen cache file");
  }
  auto version = get_u32(in);
  if (version != kEigenCacheVersion) {
    throw Error(ErrorCode::kParse, "unsupported eigen cache version " + std::to_string(version));
  }
  EigenBasis basis;
  auto kind = get_u32(in);
  if (kind > 1) throw Error(ErrorCode::kParse, "bad laplacian kind in eigen cache");
  basis.kind = kind == 0 ? LaplacianKind::kNormalized : LaplacianKind::kInterestedReader;
  basis.n_documents = get_u64(in);
  auto n_active = get_u64(in);
  auto n_isolated = get_u64(in);
  auto m = get_u64(in);
  if (n_active + n_isolated != basis.n_documents || m > n_active) {
    throw Error(ErrorCode::kParse, "inconsistent eigen cache header");
  }
  basis.residual_tol = get_f64(in);
  basis.active.resize(n_active);
  basis.isolated.resize(n_isolated);
  for (auto& i : basis.active) i = get_u64(in);
  for (auto& i : basis.isolated) i = get_u64(in);
  basis.eigenvalues.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < basis.eigenvalues.size(); ++i) basis.eigenvalues(i) = get_f64(in);
  basis.eigenvectors.resize(static_cast<Eigen::Index>(n_active), static_cast<Eigen::Index>(m));
  for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.eigenvectors.rows(); ++r) {
      basis.eigenvectors(r, c) = get_f64(in);
    }
  }
  return basis;
}

EigenCache::EigenCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path EigenCache::path_for(const std::string& key) const {
  return dir_ / (key + ".eig");
}

std::optional<EigenBasis> EigenCache::load(const std::string& key) const {
  auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return read_eigen_basis(in);
}

void EigenCache::store(const std::string& key, const EigenBasis& basis) const {
  std::filesystem::create_directories(dir_);
  auto path = path_for(key);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string());
    write_eigen_basis(out, basis);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dimminer
