// vaemm/rng.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_RNG_HPP_
#define VAEMM_RNG_HPP_

#include <cstdint>
#include <random>

namespace vaemm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for substream `index` of a base seed. Each frame's MH chain,
/// and each independent generator in the synthetic-scene sampler, gets its
/// own derived stream so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x51ed2701ULL));
}

// Draw helpers. Found by unqualified lookup inside this namespace; a test
// may supply its own generator type with matching overloads via ADL.
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace vaemm

#endif  // VAEMM_RNG_HPP_
