//===- Features.h - Call-site state encoding --------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// The eleven integer features a policy sees at each call site. The order of
// FeatureIndex is the wire order used by logs, policy inputs and stats.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_FEATURES_H
#define INLINESIM_FEATURES_H

#include "inlinesim/ModuleGraph.h"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace inlinesim {

enum class FeatureIndex : std::size_t {
  CallerBasicBlockCount,
  CallerConditionallyExecutedBlocks,
  CallerUsers,
  CalleeBasicBlockCount,
  CalleeConditionallyExecutedBlocks,
  CalleeUsers,
  CallsiteHeight,
  CostEstimate,
  NumberConstantParams,
  EdgeCount,
  NodeCount,
};

inline constexpr std::size_t NumFeatures = 11;

extern const std::array<std::string_view, NumFeatures> FeatureNames;

struct FeatureVector {
  std::array<std::int64_t, NumFeatures> Values{};

  std::int64_t operator[](FeatureIndex I) const {
    return Values[static_cast<std::size_t>(I)];
  }
  std::int64_t &operator[](FeatureIndex I) {
    return Values[static_cast<std::size_t>(I)];
  }

  friend bool operator==(const FeatureVector &, const FeatureVector &) = default;
};

/// Longest path, in edges, from each function's component to a leaf
/// component of the initial call graph's condensation.
std::vector<std::int64_t> computeHeights(const ModuleGraph &M);

/// Reads the current state of \p M at live call site \p S. Throws
/// Error(InvalidCallSite) when \p S is dead.
FeatureVector extractFeatures(const ModuleGraph &M, SiteRef S,
                              std::span<const std::int64_t> Heights);

struct FeatureStats {
  std::array<double, NumFeatures> Mean{};
  std::array<double, NumFeatures> Std{};
  std::uint64_t Samples = 0;

  friend bool operator==(const FeatureStats &, const FeatureStats &) = default;
};

inline constexpr double StdFloor = 1e-6;

/// Identity normalization: zero mean, unit deviation.
FeatureStats identityStats();

/// Population mean and standard deviation per feature. Sums are accumulated
/// exactly in integers, so the result does not depend on sample order.
/// Throws Error(Data) on empty input.
FeatureStats computeStats(std::span<const FeatureVector> Samples);

} // namespace inlinesim

#endif // INLINESIM_FEATURES_H
