//===- Heuristic.cpp - Cost/threshold inlining rule -----------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Heuristic.h"

using namespace inlinesim;

Action inlinesim::heuristicDecide(const FeatureVector &F,
                                  const HeuristicParams &P) {
  std::int64_t Threshold = P.BaseThreshold;
  if (F[FeatureIndex::CalleeBasicBlockCount] == 1)
    Threshold += P.SingleBlockBonus;
  return F[FeatureIndex::CostEstimate] <= Threshold ? Action::Inline
                                                    : Action::DontInline;
}
