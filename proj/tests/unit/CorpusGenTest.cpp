//===- CorpusGenTest.cpp - Synthetic corpus generator ---------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "Fixtures.h"

#include "inlinesim/CorpusGen.h"
#include "inlinesim/Environment.h"
#include "inlinesim/Error.h"
#include "inlinesim/Features.h"
#include "inlinesim/ModuleIO.h"

#include <gtest/gtest.h>

#include <filesystem>

using namespace inlinesim;
namespace fs = std::filesystem;

namespace {

CorpusParams smallParams(std::uint64_t Seed) {
  CorpusParams P;
  P.Seed = Seed;
  P.ModuleCount = 60;
  return P;
}

TEST(CorpusGen, SameSeedSameCorpus) {
  auto A = generateCorpus(smallParams(7));
  auto B = generateCorpus(smallParams(7));
  ASSERT_EQ(A, B);
  std::string Ta, Tb;
  for (std::size_t I = 0; I < A.size(); ++I) {
    Ta += printModule(A[I]);
    Tb += printModule(B[I]);
  }
  EXPECT_EQ(Ta, Tb);
  EXPECT_NE(generateCorpus(smallParams(8)), A);
}

TEST(CorpusGen, ModulesAreIndependentOfCount) {
  CorpusParams P = smallParams(3);
  auto Full = generateCorpus(P);
  EXPECT_EQ(generateModule(P, 17), Full[17]);
}

TEST(CorpusGen, EveryModuleIsValidWithACallSite) {
  auto Corpus = generateCorpus(smallParams(11));
  ASSERT_EQ(Corpus.size(), 60u);
  for (const ModuleDesc &D : Corpus) {
    EXPECT_TRUE(validate(D).empty()) << D.Name;
    std::size_t Sites = 0;
    for (const FunctionDesc &F : D.Functions)
      Sites += F.CallSites.size();
    EXPECT_GE(Sites, 1u) << D.Name;
    EXPECT_GE(D.Functions.size(), 8u);
    EXPECT_LE(D.Functions.size(), 40u);
  }
}

TEST(CorpusGen, NoBackEdgesMeansDag) {
  CorpusParams P = smallParams(5);
  P.BackEdgeProbability = 0;
  for (const ModuleDesc &D : generateCorpus(P)) {
    ModuleGraph M = ModuleGraph::build(D);
    for (const auto &Scc : M.initialGraph().Sccs)
      EXPECT_EQ(Scc.size(), 1u) << D.Name;
  }
}

TEST(CorpusGen, BackEdgesCreateSccs) {
  CorpusParams P = smallParams(5);
  P.BackEdgeProbability = 0.3;
  std::size_t Multi = 0;
  for (const ModuleDesc &D : generateCorpus(P))
    for (const auto &Scc : ModuleGraph::build(D).initialGraph().Sccs)
      Multi += Scc.size() > 1;
  EXPECT_GT(Multi, 0u);
}

TEST(CorpusGen, NoConstArgsMeansNoConstantParams) {
  CorpusParams P = smallParams(9);
  P.ConstArgProbability = 0;
  for (const ModuleDesc &D : generateCorpus(P)) {
    ModuleGraph M = ModuleGraph::build(D);
    auto Heights = computeHeights(M);
    for (std::size_t I = 0; I < M.callSiteSlots(); ++I) {
      auto F = extractFeatures(M, SiteRef(static_cast<std::uint32_t>(I)), Heights);
      EXPECT_EQ(F[FeatureIndex::NumberConstantParams], 0);
    }
    EpisodeResult E =
        runEpisode(M, constantDecider(Action::Inline), M.growthCap());
    for (const StepRecord &S : E.Steps)
      EXPECT_EQ(S.Features[FeatureIndex::NumberConstantParams], 0);
  }
}

TEST(CorpusGen, MostModulesHaveFiveDecisions) {
  CorpusParams P;
  P.Seed = 21;
  P.ModuleCount = 100;
  int Rich = 0;
  for (const ModuleDesc &D : generateCorpus(P)) {
    EpisodeResult E = runEpisode(ModuleGraph::build(D),
                                 heuristicDecider(HeuristicParams{}), D.GrowthCap);
    std::size_t Decisions = 0;
    for (const StepRecord &S : E.Steps)
      Decisions += !S.Forced;
    Rich += Decisions >= 5;
  }
  EXPECT_GE(Rich, 80);
}

TEST(CorpusGen, RejectsInfeasibleParams) {
  auto Bad = [](auto Edit) {
    CorpusParams P;
    Edit(P);
    try {
      checkParams(P);
    } catch (const Error &E) {
      return E.kind() == ErrorKind::Params;
    }
    return false;
  };
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.Size = {1, 1}; P.CallSitesPerFunction = {1, 2}; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.Size = {10, 5}; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.Size = {0, 5}; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.FunctionsPerModule = {1, 5}; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.ConstArgProbability = 1.5; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.BackEdgeProbability = -0.1; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.ModuleCount = -1; }));
  EXPECT_TRUE(Bad([](CorpusParams &P) { P.GrowthCap = Ratio(1, 1); }));
  EXPECT_FALSE(Bad([](CorpusParams &) {}));
}

TEST(CorpusGen, DirectoryRoundTrip) {
  fs::path Dir = fs::temp_directory_path() / "inlinesim_corpusgen_test";
  fs::remove_all(Dir);
  CorpusParams P = smallParams(2);
  P.ModuleCount = 5;
  auto Corpus = generateCorpus(P);
  writeCorpusDir(Dir, Corpus, P);
  EXPECT_TRUE(fs::exists(Dir / "manifest.json"));
  EXPECT_EQ(readCorpusDir(Dir), Corpus);
  // Refuses to overwrite.
  EXPECT_THROW(writeCorpusDir(Dir, Corpus, P), Error);
  EXPECT_EQ(readCorpusDir(Dir), Corpus);
  fs::remove_all(Dir);
}

} // namespace
