//===- Rng.h - Splittable counter-based random numbers ----------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// SplitMix64 keyed by (seed, counter). Child streams are derived from a key
// rather than from draws, so a task's stream depends only on its key and not
// on how many numbers other tasks consumed. Distributions are implemented
// here instead of using <random> so sequences are identical on every
// standard library.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_RNG_H
#define INLINESIM_RNG_H

#include <cstdint>

namespace inlinesim {

class Rng {
public:
  explicit Rng(std::uint64_t Seed) : Key(mix(Seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent child stream for \p Tag. Does not advance this stream.
  Rng split(std::uint64_t Tag) const {
    Rng Child(0);
    Child.Key = mix(Key + Gamma * (Tag + 1) + 0x3c6ef372fe94f82bULL);
    return Child;
  }

  std::uint64_t nextU64() { return mix(Key + Gamma * ++Counter); }

  /// Uniform integer in [Lo, Hi], inclusive. Lo <= Hi.
  std::int64_t uniformInt(std::int64_t Lo, std::int64_t Hi);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }
  bool bernoulli(double P) { return uniform01() < P; }
  /// Standard normal (Box-Muller, one value per call).
  double normal();

  static std::uint64_t mix(std::uint64_t Z) {
    Z = (Z ^ (Z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    Z = (Z ^ (Z >> 27)) * 0x94d049bb133111ebULL;
    return Z ^ (Z >> 31);
  }

private:
  static constexpr std::uint64_t Gamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t Key;
  std::uint64_t Counter = 0;
};

} // namespace inlinesim

#endif // INLINESIM_RNG_H
