#pragma once

#include <cstdint>

namespace arlhom {

/// Counter-based hashing: realizations depend only on (seed, index),
/// never on draw order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_pair(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ED270B7A53ull));
}

/// Named sub-stream derivation for seed bookkeeping (replayable runs).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  return hash_pair(hash_pair(master, stream), index);
}

/// Uniform double in [0, 1) from a hashed state.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace arlhom
