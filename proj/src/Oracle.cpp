//===- Oracle.cpp - Exhaustive optimal inlining for tiny modules ----------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Oracle.h"
#include "inlinesim/Error.h"

#include <fmt/format.h>

#include <limits>
#include <memory>

using namespace inlinesim;

namespace {

struct Search {
  std::size_t MaxDecisions;
  Ratio Cap;
  std::int64_t InitialSize;
  std::vector<Action> Path;
  OracleResult Best;

  void explore(ModuleGraph &M, Traversal &Walk, bool Capped) {
    while (auto S = Walk.next(M)) {
      Capped = Capped || Cap.exceededBy(M.size(), InitialSize);
      if (Capped)
        continue;
      if (Path.size() == MaxDecisions)
        throw Error(ErrorKind::DepthExceeded,
                    fmt::format("module needs more than {} decisions",
                                MaxDecisions));
      ++Best.NodesExplored;

      ModuleGraph InlinedM = M;
      Traversal InlinedWalk = Walk;

      Path.push_back(Action::DontInline);
      explore(M, Walk, Capped);
      Path.back() = Action::Inline;
      InlineOutcome Out = InlinedM.inlineCallSite(*S);
      InlinedWalk.inlined(Out);
      explore(InlinedM, InlinedWalk, Capped);
      Path.pop_back();
      return;
    }
    // Strict improvement keeps the earliest-declining optimum.
    if (M.size() < Best.OptimalFinalSize) {
      Best.OptimalFinalSize = M.size();
      Best.Sequence = Path;
    }
  }
};

} // namespace

OracleResult inlinesim::bruteForceOptimal(const ModuleGraph &M,
                                          std::size_t MaxDecisions, Ratio Cap) {
  Search S{MaxDecisions, Cap, M.size(), {}, {}};
  S.Best.OptimalFinalSize = std::numeric_limits<std::int64_t>::max();
  ModuleGraph Copy = M;
  Traversal Walk(Copy);
  S.explore(Copy, Walk, false);
  return S.Best;
}

Decider inlinesim::replayDecider(std::vector<Action> Sequence) {
  auto Remaining = std::make_shared<std::vector<Action>>(std::move(Sequence));
  auto Next = std::make_shared<std::size_t>(0);
  return [Remaining, Next](const FeatureVector &) {
    if (*Next >= Remaining->size())
      return Action::DontInline;
    return (*Remaining)[(*Next)++];
  };
}

std::string inlinesim::oracleResultText(const std::string &ModuleId,
                                        const OracleResult &R) {
  std::string Seq;
  for (Action A : R.Sequence)
    Seq += A == Action::Inline ? '1' : '0';
  return fmt::format("module {}\noptimal_final_size {}\nsequence {}\n"
                     "nodes_explored {}\n",
                     ModuleId, R.OptimalFinalSize, Seq.empty() ? "-" : Seq,
                     R.NodesExplored);
}
