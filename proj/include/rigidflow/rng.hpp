#pragma once

#include <cstdint>
#include <random>

namespace rigidflow {

using Rng = std::mt19937_64;

// Independent stream for one work item (a residue, a sample index). Streams
// depend only on (seed, item), never on iteration order or thread count.
// SplitMix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng substream(std::uint64_t seed, std::uint64_t item) {
  return Rng(splitmix64(splitmix64(seed) + item));
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace rigidflow
