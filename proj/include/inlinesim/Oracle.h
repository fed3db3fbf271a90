//===- Oracle.h - Exhaustive optimal inlining for tiny modules --*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_ORACLE_H
#define INLINESIM_ORACLE_H

#include "inlinesim/Environment.h"

#include <cstdint>
#include <string>
#include <vector>

namespace inlinesim {

inline constexpr std::size_t DefaultOracleMaxDecisions = 14;

struct OracleResult {
  std::int64_t OptimalFinalSize = 0;
  /// One action per policy query (forced steps excluded), in visit order.
  std::vector<Action> Sequence;
  std::uint64_t NodesExplored = 0;
};

/// Depth-first search over every decision sequence the traversal can
/// produce, under the same growth cap as runEpisode. Among optimal
/// sequences, returns the one that declines earliest. Throws
/// Error(DepthExceeded) if any path needs more than \p MaxDecisions
/// decisions.
OracleResult bruteForceOptimal(const ModuleGraph &M, std::size_t MaxDecisions,
                               Ratio Cap);

/// Replays \p Sequence, one action per query, then declines.
Decider replayDecider(std::vector<Action> Sequence);

std::string oracleResultText(const std::string &ModuleId, const OracleResult &R);

} // namespace inlinesim

#endif // INLINESIM_ORACLE_H
