#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ebkf {

using Seed = std::uint64_t;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Named sub-stream tags so that every consumer of randomness draws from its
// own independent stream. Adding parallelism cannot reorder draws within a
// stream because each (seed, path) pair owns a dedicated engine.
namespace stream_tag {
inline constexpr std::uint64_t shock = 1;
inline constexpr std::uint64_t gate = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t thinning = 4;
inline constexpr std::uint64_t latent = 5;
inline constexpr std::uint64_t benchmark = 6;
inline constexpr std::uint64_t cv = 7;
}  // namespace stream_tag

/// Engine for the sub-stream identified by (root, path...). Deterministic:
/// the same root seed and path always produce the same draw sequence.
inline std::mt19937_64 substream(Seed root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = root ^ 0xD1B54A32D192ED03ULL;
  detail::splitmix64(s);
  for (std::uint64_t tag : path) {
    s ^= tag + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
    detail::splitmix64(s);
  }
  std::uint64_t state = s;
  return std::mt19937_64(detail::splitmix64(state));
}

/// Derived root seed for a child task (e.g. one benchmark replication).
inline Seed derive_seed(Seed root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = root ^ 0xA0761D6478BD642FULL;
  detail::splitmix64(s);
  for (std::uint64_t tag : path) {
    s ^= tag + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
    detail::splitmix64(s);
  }
  return detail::splitmix64(s);
}

/// Stable 64-bit key for a double-valued stream component (grid coordinates).
inline std::uint64_t key_of(double x) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(x));
  __builtin_memcpy(&bits, &x, sizeof(bits));
  return bits;
}

}  // namespace ebkf
