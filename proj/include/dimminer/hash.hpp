#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dimminer {

// Incremental SHA-256 used for content-addressed cache keys.
class ContentHasher {
 public:
  ContentHasher();
  ~ContentHasher();
  ContentHasher(const ContentHasher&) = delete;
  ContentHasher& operator=(const ContentHasher&) = delete;

  ContentHasher& update(std::string_view bytes);
  // Length-prefixed, so adjacent fields cannot alias.
  ContentHasher& field(std::string_view bytes);
  ContentHasher& field(std::uint64_t value);

  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace dimminer
