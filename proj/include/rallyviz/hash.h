#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rallyviz {

// 64-bit FNV-1a. Used for content-derived ids and cache digests; not a
// security primitive.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value);

inline std::string digest_of(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace rallyviz
