//===- Environment.h - Inlining episodes over a module ----------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// An episode walks a module's call sites bottom-up over the initial call
// graph's strongly connected components, asks a decision function about each
// one, and applies the inlines it asks for. Each step's reward is the exact
// change in native size, so an episode's total reward is the module's size
// reduction.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_ENVIRONMENT_H
#define INLINESIM_ENVIRONMENT_H

#include "inlinesim/Features.h"
#include "inlinesim/Heuristic.h"
#include "inlinesim/ModuleGraph.h"
#include "inlinesim/Ratio.h"

#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inlinesim {

struct StepRecord {
  FeatureVector Features;
  Action Act = Action::DontInline;
  std::int64_t Reward = 0;
  /// The growth cap overrode the policy; Act is DontInline.
  bool Forced = false;

  friend bool operator==(const StepRecord &, const StepRecord &) = default;
};

struct EpisodeResult {
  std::string ModuleId;
  std::int64_t InitialSize = 0;
  std::int64_t FinalSize = 0;
  std::int64_t TotalReward = 0;
  std::vector<StepRecord> Steps;

  friend bool operator==(const EpisodeResult &, const EpisodeResult &) = default;
};

/// Empty when \p E is internally consistent, otherwise the first violation.
std::optional<std::string> checkEpisode(const EpisodeResult &E);

/// Resumable call-site walk. Components of the initial graph callee-first,
/// functions within a component by ascending id, call sites in declaration
/// order. Sites cloned by an inline are visited next. Dead sites and edges
/// inside one component are skipped.
class Traversal {
public:
  explicit Traversal(const ModuleGraph &M);

  std::optional<SiteRef> next(const ModuleGraph &M);
  /// Queues the clones of the site last returned by next().
  void inlined(const InlineOutcome &Outcome);

private:
  std::vector<FuncRef> FunctionOrder;
  std::size_t NextFunction = 0;
  std::deque<SiteRef> Pending;
};

/// The sites visited when nothing is inlined.
std::vector<SiteRef> traversalOrder(const ModuleGraph &M);

using Decider = std::function<Action(const FeatureVector &)>;

/// Runs one episode on a private copy of \p M. Once module size exceeds
/// \p Cap times the starting size, remaining sites are recorded as forced
/// no-inline steps without consulting \p Decide.
EpisodeResult runEpisode(const ModuleGraph &M, const Decider &Decide, Ratio Cap);

/// The heuristic, never-inline and always-inline deciders.
Decider heuristicDecider(HeuristicParams P);
Decider constantDecider(Action A);

//===----------------------------------------------------------------------===//
// Trajectory logs: one JSON object per line, fixed field order.
//===----------------------------------------------------------------------===//

std::string episodeToLine(const EpisodeResult &E);
/// Throws Error(Parse) when the line is malformed or violates an episode
/// invariant.
EpisodeResult episodeFromLine(std::string_view Line);

std::string writeLog(std::span<const EpisodeResult> Episodes);
/// Errors name the 1-based line number.
std::vector<EpisodeResult> readLog(std::string_view Text);

/// Sidecar summary written next to each log batch.
std::string logStatsJson(std::span<const EpisodeResult> Episodes);

} // namespace inlinesim

#endif // INLINESIM_ENVIRONMENT_H
