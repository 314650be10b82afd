#pragma once

#include <cstdint>
#include <random>

namespace phigpr {

// splitmix64 finalizer, the usual constants.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based substream derivation: stream `i` of a master seed.
/// Chained twice this gives collision-free (member, generator) substreams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x6a09e667f3bcc909ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace phigpr
