#include "dimminer/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstdio>

#include "dimminer/error.hpp"

namespace dimminer {

namespace {
EVP_MD_CTX* as_ctx(void* p) { return static_cast<EVP_MD_CTX*>(p); }
}  // namespace

ContentHasher::ContentHasher() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(as_ctx(ctx_), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 init failed");
  }
}

ContentHasher::~ContentHasher() { EVP_MD_CTX_free(as_ctx(ctx_)); }

ContentHasher& ContentHasher::update(std::string_view bytes) {
  EVP_DigestUpdate(as_ctx(ctx_), bytes.data(), bytes.size());
  return *this;
}

ContentHasher& ContentHasher::field(std::uint64_t value) {
  std::array<unsigned char, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(value >> (8 * i));
  EVP_DigestUpdate(as_ctx(ctx_), le.data(), le.size());
  return *this;
}

ContentHasher& ContentHasher::field(std::string_view bytes) {
  field(static_cast<std::uint64_t>(bytes.size()));
  return update(bytes);
}

std::string ContentHasher::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(as_ctx(ctx_), digest.data(), &len);
  std::string out;
  out.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    out += buf;
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  ContentHasher h;
  h.update(bytes);
  return h.hex_digest();
}

}  // namespace dimminer
