#pragma once

#include <cstdint>
#include <random>

namespace ddotfs {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Engine for one logical stream. Streams are identified by (seed, stream id)
// so that trials and their sub-draws (channel, data, noise) never overlap
// and can be generated in any order.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL)));
}

enum Stream : std::uint64_t {
  kStreamChannel = 1,
  kStreamData = 2,
  kStreamNoise = 3,
};

}  // namespace ddotfs
