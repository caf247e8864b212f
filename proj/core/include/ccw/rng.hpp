#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ccw/types.hpp"

namespace ccw {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for a numbered stream of a parent seed.
inline seed_t derive_seed(seed_t parent, std::uint64_t stream) {
  return splitmix64(splitmix64(parent) ^ splitmix64(stream + 0x5851F42D4C957F2DULL));
}

// Child seed for a named stream; FNV-1a over the name selects the stream.
inline seed_t derive_seed(seed_t parent, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(parent, h);
}

}  // namespace ccw
