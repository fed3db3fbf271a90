//===- Environment.cpp - Inlining episodes over a module ------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Environment.h"
#include "inlinesim/Error.h"

#include <fmt/format.h>
#include <json.hpp>

#include <numeric>

using namespace inlinesim;
using Json = nlohmann::ordered_json;

std::optional<std::string> inlinesim::checkEpisode(const EpisodeResult &E) {
  std::int64_t Sum = 0;
  for (std::size_t I = 0; I < E.Steps.size(); ++I) {
    const StepRecord &S = E.Steps[I];
    if (S.Forced && S.Act != Action::DontInline)
      return fmt::format("step {} is forced but inlines", I);
    if (S.Act == Action::DontInline && S.Reward != 0)
      return fmt::format("step {} does not inline but has reward {}", I,
                         S.Reward);
    Sum += S.Reward;
  }
  if (Sum != E.TotalReward)
    return fmt::format("total_reward {} differs from step sum {}",
                       E.TotalReward, Sum);
  if (E.InitialSize - E.FinalSize != E.TotalReward)
    return fmt::format("total_reward {} differs from size reduction {}",
                       E.TotalReward, E.InitialSize - E.FinalSize);
  return std::nullopt;
}

//===----------------------------------------------------------------------===//
// Traversal
//===----------------------------------------------------------------------===//

Traversal::Traversal(const ModuleGraph &M) {
  for (const auto &Scc : M.initialGraph().Sccs)
    FunctionOrder.insert(FunctionOrder.end(), Scc.begin(), Scc.end());
}

std::optional<SiteRef> Traversal::next(const ModuleGraph &M) {
  for (;;) {
    while (Pending.empty()) {
      if (NextFunction == FunctionOrder.size())
        return std::nullopt;
      const FunctionDef &F = M.function(FunctionOrder[NextFunction++]);
      if (F.Live)
        Pending.assign(F.CallSites.begin(), F.CallSites.end());
    }
    SiteRef S = Pending.front();
    Pending.pop_front();
    if (!M.isLive(S))
      continue;
    const CallSite &C = M.callSite(S);
    if (C.Caller == C.Callee || M.sameInitialScc(C.Caller, C.Callee))
      continue;
    return S;
  }
}

void Traversal::inlined(const InlineOutcome &Outcome) {
  Pending.insert(Pending.begin(), Outcome.ClonedCallSites.begin(),
                 Outcome.ClonedCallSites.end());
}

std::vector<SiteRef> inlinesim::traversalOrder(const ModuleGraph &M) {
  std::vector<SiteRef> Order;
  Traversal T(M);
  while (auto S = T.next(M))
    Order.push_back(*S);
  return Order;
}

//===----------------------------------------------------------------------===//
// Episodes
//===----------------------------------------------------------------------===//

EpisodeResult inlinesim::runEpisode(const ModuleGraph &Original,
                                    const Decider &Decide, Ratio Cap) {
  ModuleGraph M = Original;
  const std::vector<std::int64_t> Heights = computeHeights(M);
  EpisodeResult R;
  R.ModuleId = M.name();
  R.InitialSize = M.size();

  Traversal Walk(M);
  bool Capped = false;
  while (auto S = Walk.next(M)) {
    StepRecord Step;
    Step.Features = extractFeatures(M, *S, Heights);
    Capped = Capped || Cap.exceededBy(M.size(), R.InitialSize);
    if (Capped) {
      Step.Forced = true;
    } else {
      Step.Act = Decide(Step.Features);
      if (Step.Act == Action::Inline) {
        InlineOutcome Out = M.inlineCallSite(*S);
        Step.Reward = Out.StepReward;
        Walk.inlined(Out);
      }
    }
    R.TotalReward += Step.Reward;
    R.Steps.push_back(Step);
  }
  R.FinalSize = M.size();
  return R;
}

Decider inlinesim::heuristicDecider(HeuristicParams P) {
  return [P](const FeatureVector &F) { return heuristicDecide(F, P); };
}

Decider inlinesim::constantDecider(Action A) {
  return [A](const FeatureVector &) { return A; };
}

//===----------------------------------------------------------------------===//
// Trajectory logs
//===----------------------------------------------------------------------===//

static const char *const EpisodeKeys[] = {"module", "initial_size",
                                          "final_size", "total_reward",
                                          "steps"};
static const char *const StepKeys[] = {"features", "action", "reward",
                                       "forced"};

std::string inlinesim::episodeToLine(const EpisodeResult &E) {
  Json Steps = Json::array();
  for (const StepRecord &S : E.Steps) {
    Json Step;
    Step["features"] = S.Features.Values;
    Step["action"] = toInt(S.Act);
    Step["reward"] = S.Reward;
    Step["forced"] = S.Forced;
    Steps.push_back(std::move(Step));
  }
  Json J;
  J["module"] = E.ModuleId;
  J["initial_size"] = E.InitialSize;
  J["final_size"] = E.FinalSize;
  J["total_reward"] = E.TotalReward;
  J["steps"] = std::move(Steps);
  return J.dump();
}

template <std::size_t N>
static void requireKeys(const Json &J, const char *const (&Keys)[N],
                        const char *What) {
  if (!J.is_object() || J.size() != N)
    throw Error(ErrorKind::Parse, fmt::format("{} must have {} fields", What, N));
  std::size_t I = 0;
  for (auto It = J.begin(); It != J.end(); ++It, ++I)
    if (It.key() != Keys[I])
      throw Error(ErrorKind::Parse,
                  fmt::format("{} field {} must be '{}'", What, I, Keys[I]));
}

static std::int64_t asInt(const Json &J, const char *What) {
  if (!J.is_number_integer())
    throw Error(ErrorKind::Parse, fmt::format("{} must be an integer", What));
  return J.get<std::int64_t>();
}

EpisodeResult inlinesim::episodeFromLine(std::string_view Line) {
  Json J;
  try {
    J = Json::parse(Line);
  } catch (const Json::exception &Ex) {
    throw Error(ErrorKind::Parse, Ex.what());
  }
  requireKeys(J, EpisodeKeys, "episode");
  EpisodeResult E;
  if (!J["module"].is_string())
    throw Error(ErrorKind::Parse, "module must be a string");
  E.ModuleId = J["module"].get<std::string>();
  E.InitialSize = asInt(J["initial_size"], "initial_size");
  E.FinalSize = asInt(J["final_size"], "final_size");
  E.TotalReward = asInt(J["total_reward"], "total_reward");
  if (!J["steps"].is_array())
    throw Error(ErrorKind::Parse, "steps must be an array");
  for (const Json &SJ : J["steps"]) {
    requireKeys(SJ, StepKeys, "step");
    StepRecord S;
    const Json &F = SJ["features"];
    if (!F.is_array() || F.size() != NumFeatures)
      throw Error(ErrorKind::Parse,
                  fmt::format("features must have {} entries", NumFeatures));
    for (std::size_t I = 0; I < NumFeatures; ++I) {
      S.Features.Values[I] = asInt(F[I], "feature");
      if (S.Features.Values[I] < 0)
        throw Error(ErrorKind::Parse, "features must be non-negative");
    }
    std::int64_t A = asInt(SJ["action"], "action");
    if (A != 0 && A != 1)
      throw Error(ErrorKind::Parse, "action must be 0 or 1");
    S.Act = static_cast<Action>(A);
    S.Reward = asInt(SJ["reward"], "reward");
    if (!SJ["forced"].is_boolean())
      throw Error(ErrorKind::Parse, "forced must be a boolean");
    S.Forced = SJ["forced"].get<bool>();
    E.Steps.push_back(S);
  }
  if (auto Violation = checkEpisode(E))
    throw Error(ErrorKind::Parse, *Violation);
  return E;
}

std::string inlinesim::writeLog(std::span<const EpisodeResult> Episodes) {
  std::string Out;
  for (const EpisodeResult &E : Episodes) {
    Out += episodeToLine(E);
    Out += '\n';
  }
  return Out;
}

std::vector<EpisodeResult> inlinesim::readLog(std::string_view Text) {
  std::vector<EpisodeResult> Out;
  std::size_t Pos = 0;
  unsigned LineNo = 0;
  while (Pos < Text.size()) {
    auto Nl = Text.find('\n', Pos);
    std::string_view Line = Text.substr(
        Pos, Nl == std::string_view::npos ? std::string_view::npos : Nl - Pos);
    Pos = Nl == std::string_view::npos ? Text.size() : Nl + 1;
    ++LineNo;
    try {
      Out.push_back(episodeFromLine(Line));
    } catch (const Error &E) {
      throw Error(ErrorKind::Parse, fmt::format("line {}: {}", LineNo, E.what()));
    }
  }
  return Out;
}

std::string inlinesim::logStatsJson(std::span<const EpisodeResult> Episodes) {
  std::int64_t Total = 0;
  for (const EpisodeResult &E : Episodes)
    Total += E.TotalReward;
  Json J;
  J["episodes"] = Episodes.size();
  J["mean_total_reward"] =
      Episodes.empty() ? 0.0
                       : static_cast<double>(Total) /
                             static_cast<double>(Episodes.size());
  return J.dump() + "\n";
}
