//===- Features.cpp - Call-site state encoding ----------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Features.h"
#include "inlinesim/Error.h"

#include <algorithm>
#include <bit>
#include <cmath>

using namespace inlinesim;

const std::array<std::string_view, NumFeatures> inlinesim::FeatureNames = {
    "caller_basic_block_count",
    "caller_conditionally_executed_blocks",
    "caller_users",
    "callee_basic_block_count",
    "callee_conditionally_executed_blocks",
    "callee_users",
    "callsite_height",
    "cost_estimate",
    "number_constant_params",
    "edge_count",
    "node_count",
};

std::vector<std::int64_t> inlinesim::computeHeights(const ModuleGraph &M) {
  const InitialCallGraph &G = M.initialGraph();
  // Components are stored callee-first, so every successor component is
  // finished before its callers are visited.
  std::vector<std::int64_t> SccHeight(G.Sccs.size(), 0);
  for (std::size_t C = 0; C < G.Sccs.size(); ++C)
    for (FuncRef F : G.Sccs[C])
      for (FuncRef Succ : G.Successors[index(F)]) {
        std::uint32_t SC = G.SccOf[index(Succ)];
        if (SC != C)
          SccHeight[C] = std::max(SccHeight[C], SccHeight[SC] + 1);
      }
  std::vector<std::int64_t> Heights(G.SccOf.size());
  for (std::size_t F = 0; F < Heights.size(); ++F)
    Heights[F] = SccHeight[G.SccOf[F]];
  return Heights;
}

FeatureVector inlinesim::extractFeatures(const ModuleGraph &M, SiteRef S,
                                         std::span<const std::int64_t> Heights) {
  if (!M.isLive(S))
    throw Error(ErrorKind::InvalidCallSite,
                "cannot extract features of a dead call site");
  const CallSite &C = M.callSite(S);
  const FunctionDef &Caller = M.function(C.Caller);
  const FunctionDef &Callee = M.function(C.Callee);

  FeatureVector V;
  using FI = FeatureIndex;
  V[FI::CallerBasicBlockCount] = Caller.BasicBlocks;
  V[FI::CallerConditionallyExecutedBlocks] = Caller.ConditionalBlocks;
  V[FI::CallerUsers] = Caller.Users;
  V[FI::CalleeBasicBlockCount] = Callee.BasicBlocks;
  V[FI::CalleeConditionallyExecutedBlocks] = Callee.ConditionalBlocks;
  V[FI::CalleeUsers] = Callee.Users;
  V[FI::CallsiteHeight] = Heights[index(C.Callee)];
  V[FI::CostEstimate] = Callee.Size - M.constantSavings(C) - 1;
  V[FI::NumberConstantParams] =
      std::count(C.ConstArgs.begin(), C.ConstArgs.end(), true);
  V[FI::EdgeCount] = static_cast<std::int64_t>(M.liveCallSiteCount());
  V[FI::NodeCount] = static_cast<std::int64_t>(M.liveFunctionCount());
  return V;
}

FeatureStats inlinesim::identityStats() {
  FeatureStats S;
  S.Mean.fill(0.0);
  S.Std.fill(1.0);
  return S;
}

FeatureStats inlinesim::computeStats(std::span<const FeatureVector> Samples) {
  if (Samples.empty())
    throw Error(ErrorKind::Data, "feature statistics need at least one sample");
  std::array<__int128, NumFeatures> Sum{}, SumSq{};
  for (const FeatureVector &V : Samples)
    for (std::size_t I = 0; I < NumFeatures; ++I) {
      Sum[I] += V.Values[I];
      SumSq[I] += static_cast<__int128>(V.Values[I]) * V.Values[I];
    }
  const auto N = static_cast<__int128>(Samples.size());
  FeatureStats S;
  S.Samples = Samples.size();
  for (std::size_t I = 0; I < NumFeatures; ++I) {
    // N^2 * variance, exact.
    __int128 Scaled = N * SumSq[I] - Sum[I] * Sum[I];
    long double Nd = static_cast<long double>(N);
    S.Mean[I] = static_cast<double>(static_cast<long double>(Sum[I]) / Nd);
    double Std = static_cast<double>(
        std::sqrt(static_cast<long double>(Scaled)) / Nd);
    S.Std[I] = std::max(Std, StdFloor);
  }
  return S;
}
