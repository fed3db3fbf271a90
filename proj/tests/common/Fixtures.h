//===- Fixtures.h - Shared test modules and reference models ---*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// The M1 reference module and a from-scratch model of one inline step that
// works on descriptors only, so it shares no code with ModuleGraph.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_TESTS_FIXTURES_H
#define INLINESIM_TESTS_FIXTURES_H

#include "inlinesim/CorpusGen.h"
#include "inlinesim/ModuleGraph.h"
#include "inlinesim/Rng.h"

#include <algorithm>
#include <string>

namespace inlinesim::test {

inline FunctionDesc fn(std::string Id, Linkage L, std::int64_t Size,
                       std::int64_t Blocks, std::int64_t Cond,
                       std::vector<std::int64_t> Savings,
                       std::vector<CallSiteDesc> Sites) {
  FunctionDesc F;
  F.Id = std::move(Id);
  F.Link = L;
  F.Size = Size;
  F.BasicBlocks = Blocks;
  F.ConditionalBlocks = Cond;
  F.ParamCount = static_cast<std::int64_t>(Savings.size());
  F.ParamSavings = std::move(Savings);
  F.CallSites = std::move(Sites);
  return F;
}

inline ModuleDesc m1Desc() {
  ModuleDesc M;
  M.Name = "M1";
  M.GrowthCap = Ratio(3, 2);
  M.Functions = {
      fn("f_helper", Linkage::Internal, 6, 2, 1, {2, 1},
         {{"c3", "f_leaf", {}}}),
      fn("f_leaf", Linkage::Internal, 3, 1, 0, {}, {}),
      fn("f_main", Linkage::External, 10, 3, 1, {},
         {{"c1", "f_helper", {true, false}}, {"c2", "f_leaf", {}}}),
  };
  return M;
}

inline ModuleGraph m1() { return ModuleGraph::build(m1Desc()); }

inline SiteRef site(const ModuleGraph &M, std::string_view Id) {
  auto S = M.findCallSite(Id);
  if (!S)
    throw std::runtime_error("no call site " + std::string(Id));
  return *S;
}

inline FuncRef func(const ModuleGraph &M, std::string_view Id) {
  auto F = M.findFunction(Id);
  if (!F)
    throw std::runtime_error("no function " + std::string(Id));
  return *F;
}

/// Sum of function sizes in a descriptor.
inline std::int64_t descSize(const ModuleDesc &M) {
  std::int64_t S = 0;
  for (const FunctionDesc &F : M.Functions)
    S += F.Size;
  return S;
}

inline const FunctionDesc &descFn(const ModuleDesc &M, const std::string &Id) {
  for (const FunctionDesc &F : M.Functions)
    if (F.Id == Id)
      return F;
  throw std::runtime_error("no function " + Id);
}

inline std::int64_t descUsers(const ModuleDesc &M, const std::string &Id) {
  std::int64_t N = 0;
  for (const FunctionDesc &F : M.Functions)
    for (const CallSiteDesc &C : F.CallSites)
      N += C.Callee == Id;
  return N;
}

struct PredictedInline {
  std::int64_t Reward = 0;
  std::int64_t CallerSize = 0;
  std::int64_t CallerBlocks = 0;
  std::int64_t CallerCond = 0;
  bool Deleted = false;
  std::size_t Clones = 0;
};

/// Predicts the effect of inlining call site \p SiteId from the descriptor
/// alone.
inline PredictedInline predictInline(const ModuleDesc &M,
                                     const std::string &SiteId) {
  for (const FunctionDesc &A : M.Functions)
    for (const CallSiteDesc &C : A.CallSites) {
      if (C.Id != SiteId)
        continue;
      const FunctionDesc &B = descFn(M, C.Callee);
      std::int64_t Sav = 0;
      for (std::size_t P = 0; P < C.ConstArgs.size(); ++P)
        if (C.ConstArgs[P])
          Sav += B.ParamSavings[P];
      PredictedInline R;
      R.CallerSize = A.Size - 1 + B.Size - Sav;
      R.CallerBlocks = A.BasicBlocks + std::max<std::int64_t>(0, B.BasicBlocks - 1);
      R.CallerCond = A.ConditionalBlocks + B.ConditionalBlocks;
      R.Deleted = B.Link == Linkage::Internal && descUsers(M, B.Id) == 1 &&
                  B.Id != A.Id;
      R.Clones = B.CallSites.size();
      R.Reward = A.Size - R.CallerSize + (R.Deleted ? B.Size : 0);
      return R;
    }
  throw std::runtime_error("no call site " + SiteId);
}

/// A small random module; parameters themselves are randomized so the
/// sample covers tiny, recursive and const-heavy shapes.
inline ModuleDesc randomModule(std::uint64_t Seed) {
  Rng R = Rng(Seed).split(0xf1);
  CorpusParams P;
  P.Seed = Seed;
  P.ModuleCount = 1;
  P.FunctionsPerModule = {2, R.uniformInt(2, 14)};
  P.Size = {3, R.uniformInt(3, 40)};
  P.ParamCount = {0, R.uniformInt(0, 4)};
  P.CallSitesPerFunction = {0, R.uniformInt(1, 4)};
  P.ConstArgProbability = R.uniform01();
  P.InternalLinkageProbability = R.uniform01();
  P.BackEdgeProbability = R.uniform01() * 0.3;
  P.GrowthCap = Ratio(R.uniformInt(11, 40), 10);
  return generateModule(P, 0);
}

} // namespace inlinesim::test

#endif // INLINESIM_TESTS_FIXTURES_H
