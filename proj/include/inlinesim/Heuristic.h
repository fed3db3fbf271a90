//===- Heuristic.h - Cost/threshold inlining rule ---------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_HEURISTIC_H
#define INLINESIM_HEURISTIC_H

#include "inlinesim/Features.h"

#include <cstdint>

namespace inlinesim {

enum class Action : std::uint8_t { DontInline = 0, Inline = 1 };

inline int toInt(Action A) { return static_cast<int>(A); }

struct HeuristicParams {
  std::int64_t BaseThreshold = 25;
  /// Added to the threshold when the callee is a single basic block.
  std::int64_t SingleBlockBonus = 15;
};

/// Inline iff the callee's post-inlining cost is within the threshold. Reads
/// only the feature vector, so it is exactly representable by a policy.
Action heuristicDecide(const FeatureVector &F, const HeuristicParams &P);

} // namespace inlinesim

#endif // INLINESIM_HEURISTIC_H
