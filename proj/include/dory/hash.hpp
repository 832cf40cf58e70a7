#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dory {

/// FNV-1a 64-bit over bytes, seedable.
constexpr std::uint64_t kFnvBasis = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvBasis) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// Two independent FNV-1a lanes rendered as 32 hex chars. Deterministic across
/// platforms and runs, which is what cassette fingerprints need; not
/// cryptographic.
std::string fnv128_hex(std::string_view bytes);

}  // namespace dory
