#ifndef UNGSL_COMMON_HPP
#define UNGSL_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ungsl {

/// FNV-1a 64-bit hash over a byte string. Used for config fingerprints and
/// named random streams.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebull;
  return x ^ (x >> 31);
}

/// All randomness in the repo flows from one master seed through named
/// streams: stream(master, "dropout") and stream(master, "gcn-init") are
/// decorrelated and independently reproducible.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a(label));
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view label) {
  return std::mt19937_64(stream_seed(master, label));
}

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace ungsl

#endif  // UNGSL_COMMON_HPP
