// SPDX-License-Identifier: MIT
#pragma once

/// @file rng.hpp
/// @brief Deterministic per-path random substreams.
///
/// Every simulated path gets its own mt19937_64 engine seeded from a
/// splitmix64 hash of (run seed, path index). Ensembles are therefore
/// bit-identical for a given seed regardless of how paths are distributed
/// over threads.

#include <cstdint>
#include <random>

namespace smot {

/// One step of the splitmix64 generator (also a good 64-bit mixer).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Engine for substream `stream` of run `seed`.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0xD1B54A32D192ED03ull * (stream + 1);
  const std::uint64_t a = splitmix64(s);
  return std::mt19937_64(a);
}

}  // namespace smot
