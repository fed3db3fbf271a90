//===- ModuleGraph.cpp - Call-graph model of a compilation unit -----------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/ModuleGraph.h"
#include "inlinesim/Error.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

using namespace inlinesim;

static bool isValidId(std::string_view Id) {
  if (Id.empty())
    return false;
  return std::none_of(Id.begin(), Id.end(), [](char C) {
    return C == ' ' || C == '\t' || C == '\n' || C == '\r' || C == '=';
  });
}

std::vector<std::string> inlinesim::validate(const ModuleDesc &M) {
  std::vector<std::string> Out;
  if (!isValidId(M.Name))
    Out.push_back("module name '" + M.Name + "' is empty or has whitespace");
  if (!(M.GrowthCap.num() > M.GrowthCap.den()))
    Out.push_back("growth cap " + M.GrowthCap.str() + " is not above 1");

  std::map<std::string_view, const FunctionDesc *> ById;
  std::set<std::string_view> SiteIds;
  for (const FunctionDesc &F : M.Functions) {
    if (!isValidId(F.Id))
      Out.push_back("function id '" + F.Id + "' is empty or has whitespace");
    if (!ById.emplace(F.Id, &F).second)
      Out.push_back("duplicate function id '" + F.Id + "'");
    for (const CallSiteDesc &C : F.CallSites) {
      if (!isValidId(C.Id))
        Out.push_back("call site id '" + C.Id + "' is empty or has whitespace");
      if (!SiteIds.insert(C.Id).second)
        Out.push_back("duplicate call site id '" + C.Id + "'");
    }
  }

  for (const FunctionDesc &F : M.Functions) {
    const std::string Where = "function '" + F.Id + "': ";
    auto Sites = static_cast<std::int64_t>(F.CallSites.size());
    if (F.BasicBlocks < 1)
      Out.push_back(Where + "basic_block_count must be at least 1");
    if (F.ConditionalBlocks < 0)
      Out.push_back(Where + "conditional_block_count is negative");
    else if (F.ConditionalBlocks > F.BasicBlocks)
      Out.push_back(Where + "conditional_block_count exceeds basic_block_count");
    if (F.ParamCount < 0)
      Out.push_back(Where + "param_count is negative");
    else if (static_cast<std::int64_t>(F.ParamSavings.size()) != F.ParamCount)
      Out.push_back(Where + "param_savings length differs from param_count");
    bool NegativeSaving = false;
    std::int64_t TotalSavings = 0;
    for (std::int64_t S : F.ParamSavings) {
      NegativeSaving |= S < 0;
      TotalSavings += S;
    }
    if (NegativeSaving)
      Out.push_back(Where + "negative param saving");
    if (F.Size < 1 + Sites)
      Out.push_back(Where + "size " + std::to_string(F.Size) +
                    " is below 1 + call site count " + std::to_string(Sites));
    else if (!NegativeSaving && TotalSavings > F.Size - Sites - 1)
      Out.push_back(Where + "param savings " + std::to_string(TotalSavings) +
                    " exceed size - call sites - 1");

    for (const CallSiteDesc &C : F.CallSites) {
      auto It = ById.find(C.Callee);
      if (It == ById.end()) {
        Out.push_back("call site '" + C.Id + "': callee '" + C.Callee +
                      "' does not exist");
        continue;
      }
      if (static_cast<std::int64_t>(C.ConstArgs.size()) !=
          It->second->ParamCount)
        Out.push_back("call site '" + C.Id +
                      "': const_args length differs from callee param_count");
    }
  }
  return Out;
}

//===----------------------------------------------------------------------===//
// Condensation
//===----------------------------------------------------------------------===//

InitialCallGraph
inlinesim::condense(std::vector<std::vector<FuncRef>> Successors) {
  const std::size_t N = Successors.size();
  InitialCallGraph G;
  G.SccOf.assign(N, 0);

  constexpr std::uint32_t Unvisited = UINT32_MAX;
  std::vector<std::uint32_t> Order(N, Unvisited), Low(N, 0);
  std::vector<bool> OnStack(N, false);
  std::vector<std::uint32_t> Stack;
  std::uint32_t NextOrder = 0;

  // Explicit DFS stack of (node, next successor position).
  std::vector<std::pair<std::uint32_t, std::size_t>> Dfs;
  for (std::uint32_t Root = 0; Root < N; ++Root) {
    if (Order[Root] != Unvisited)
      continue;
    Dfs.emplace_back(Root, 0);
    Order[Root] = Low[Root] = NextOrder++;
    Stack.push_back(Root);
    OnStack[Root] = true;
    while (!Dfs.empty()) {
      auto &[V, Pos] = Dfs.back();
      if (Pos < Successors[V].size()) {
        auto W = static_cast<std::uint32_t>(Successors[V][Pos++]);
        if (Order[W] == Unvisited) {
          Order[W] = Low[W] = NextOrder++;
          Stack.push_back(W);
          OnStack[W] = true;
          Dfs.emplace_back(W, 0);
        } else if (OnStack[W]) {
          Low[V] = std::min(Low[V], Order[W]);
        }
        continue;
      }
      std::uint32_t Done = V;
      Dfs.pop_back();
      if (!Dfs.empty())
        Low[Dfs.back().first] = std::min(Low[Dfs.back().first], Low[Done]);
      if (Low[Done] != Order[Done])
        continue;
      std::vector<FuncRef> Members;
      std::uint32_t W;
      do {
        W = Stack.back();
        Stack.pop_back();
        OnStack[W] = false;
        G.SccOf[W] = static_cast<std::uint32_t>(G.Sccs.size());
        Members.push_back(FuncRef{W});
      } while (W != Done);
      std::sort(Members.begin(), Members.end());
      G.Sccs.push_back(std::move(Members));
    }
  }
  G.Successors = std::move(Successors);
  return G;
}

//===----------------------------------------------------------------------===//
// ModuleGraph
//===----------------------------------------------------------------------===//

static std::uint64_t cloneSuffix(std::string_view Id) {
  auto Quote = Id.rfind('\'');
  if (Quote == std::string_view::npos)
    return 0;
  std::uint64_t V = 0;
  auto Digits = Id.substr(Quote + 1);
  auto [Ptr, Ec] = std::from_chars(Digits.data(), Digits.data() + Digits.size(), V);
  if (Ec != std::errc() || Ptr != Digits.data() + Digits.size())
    return 0;
  return V;
}

ModuleGraph ModuleGraph::build(const ModuleDesc &Desc) {
  if (auto Violations = inlinesim::validate(Desc); !Violations.empty()) {
    std::string Msg = "invalid module '" + Desc.Name + "': " + Violations.front();
    if (Violations.size() > 1)
      Msg += " (and " + std::to_string(Violations.size() - 1) + " more)";
    throw Error(ErrorKind::Load, Msg);
  }

  ModuleGraph M;
  M.Name = Desc.Name;
  M.GrowthCap = Desc.GrowthCap;

  std::vector<const FunctionDesc *> Sorted;
  for (const FunctionDesc &F : Desc.Functions)
    Sorted.push_back(&F);
  std::sort(Sorted.begin(), Sorted.end(),
            [](auto *L, auto *R) { return L->Id < R->Id; });

  std::unordered_map<std::string_view, FuncRef> Ref;
  for (std::size_t I = 0; I < Sorted.size(); ++I)
    Ref.emplace(Sorted[I]->Id, FuncRef(static_cast<std::uint32_t>(I)));

  std::vector<std::vector<FuncRef>> Successors(Sorted.size());
  for (std::size_t I = 0; I < Sorted.size(); ++I) {
    const FunctionDesc &D = *Sorted[I];
    FunctionDef F;
    F.Id = D.Id;
    F.Link = D.Link;
    F.Size = D.Size;
    F.BasicBlocks = D.BasicBlocks;
    F.ConditionalBlocks = D.ConditionalBlocks;
    F.ParamCount = D.ParamCount;
    F.ParamSavings = D.ParamSavings;
    for (const CallSiteDesc &C : D.CallSites) {
      FuncRef Callee = Ref.at(C.Callee);
      auto S = SiteRef(static_cast<std::uint32_t>(M.Sites.size()));
      M.Sites.push_back({C.Id, FuncRef(static_cast<std::uint32_t>(I)), Callee,
                         C.ConstArgs, true});
      F.CallSites.push_back(S);
      M.CloneCounter = std::max(M.CloneCounter, cloneSuffix(C.Id));
      auto &Succ = Successors[I];
      if (std::find(Succ.begin(), Succ.end(), Callee) == Succ.end())
        Succ.push_back(Callee);
    }
    M.TotalSize += F.Size;
    M.Functions.push_back(std::move(F));
  }
  for (const CallSite &S : M.Sites)
    ++M.Functions[index(S.Callee)].Users;
  M.LiveFunctions = M.Functions.size();
  M.LiveCallSites = M.Sites.size();
  M.InitialSize = M.TotalSize;
  M.Initial = std::make_shared<const InitialCallGraph>(
      condense(std::move(Successors)));
  return M;
}

ModuleDesc ModuleGraph::toDesc() const {
  ModuleDesc D;
  D.Name = Name;
  D.GrowthCap = GrowthCap;
  for (const FunctionDef &F : Functions) {
    if (!F.Live)
      continue;
    FunctionDesc FD{F.Id,
                    F.Link,
                    F.Size,
                    F.BasicBlocks,
                    F.ConditionalBlocks,
                    F.ParamCount,
                    F.ParamSavings,
                    {}};
    for (SiteRef S : F.CallSites) {
      const CallSite &C = callSite(S);
      FD.CallSites.push_back({C.Id, function(C.Callee).Id, C.ConstArgs});
    }
    D.Functions.push_back(std::move(FD));
  }
  return D;
}

std::optional<FuncRef> ModuleGraph::findFunction(std::string_view Id) const {
  auto It = std::lower_bound(
      Functions.begin(), Functions.end(), Id,
      [](const FunctionDef &F, std::string_view Key) { return F.Id < Key; });
  if (It == Functions.end() || It->Id != Id)
    return std::nullopt;
  return FuncRef(static_cast<std::uint32_t>(It - Functions.begin()));
}

std::optional<SiteRef> ModuleGraph::findCallSite(std::string_view Id) const {
  for (std::size_t I = 0; I < Sites.size(); ++I)
    if (Sites[I].Live && Sites[I].Id == Id)
      return SiteRef(static_cast<std::uint32_t>(I));
  return std::nullopt;
}

bool ModuleGraph::isLive(SiteRef S) const {
  return index(S) < Sites.size() && Sites[index(S)].Live;
}

std::int64_t ModuleGraph::constantSavings(const CallSite &S) const {
  const FunctionDef &Callee = function(S.Callee);
  std::int64_t Saved = 0;
  for (std::size_t P = 0; P < S.ConstArgs.size(); ++P)
    if (S.ConstArgs[P])
      Saved += Callee.ParamSavings[P];
  return Saved;
}

std::string ModuleGraph::freshCloneId(const std::string &Base) {
  auto Quote = Base.rfind('\'');
  std::string Stem = Quote == std::string::npos ? Base : Base.substr(0, Quote);
  return Stem + "'" + std::to_string(++CloneCounter);
}

void ModuleGraph::eraseFunction(FuncRef Ref) {
  FunctionDef &F = Functions[index(Ref)];
  for (SiteRef S : F.CallSites) {
    CallSite &C = Sites[index(S)];
    C.Live = false;
    --Functions[index(C.Callee)].Users;
    --LiveCallSites;
  }
  F.CallSites.clear();
  F.Live = false;
  TotalSize -= F.Size;
  --LiveFunctions;
}

InlineOutcome ModuleGraph::inlineCallSite(SiteRef S) {
  if (!isLive(S))
    throw Error(ErrorKind::InvalidCallSite,
                "call site #" + std::to_string(index(S)) + " is not live");
  const FuncRef CallerRef = Sites[index(S)].Caller;
  const FuncRef CalleeRef = Sites[index(S)].Callee;
  if (CallerRef == CalleeRef || sameInitialScc(CallerRef, CalleeRef))
    throw Error(ErrorKind::RecursionRefused,
                "call site '" + Sites[index(S)].Id +
                    "' is inside a recursive component");

  const std::int64_t Saved = constantSavings(Sites[index(S)]);
  FunctionDef &Caller = Functions[index(CallerRef)];
  FunctionDef &Callee = Functions[index(CalleeRef)];
  const std::int64_t CallerBefore = Caller.Size;

  Caller.Size += Callee.Size - Saved - 1;
  Caller.BasicBlocks += std::max<std::int64_t>(0, Callee.BasicBlocks - 1);
  Caller.ConditionalBlocks += Callee.ConditionalBlocks;
  TotalSize += Caller.Size - CallerBefore;

  Sites[index(S)].Live = false;
  --LiveCallSites;

  InlineOutcome Out;
  const std::vector<SiteRef> CalleeSites = Callee.CallSites;
  for (SiteRef Orig : CalleeSites) {
    CallSite Clone = Sites[index(Orig)];
    Clone.Id = freshCloneId(Clone.Id);
    Clone.Caller = CallerRef;
    auto Ref = SiteRef(static_cast<std::uint32_t>(Sites.size()));
    ++Functions[index(Clone.Callee)].Users;
    Sites.push_back(std::move(Clone));
    ++LiveCallSites;
    Out.ClonedCallSites.push_back(Ref);
  }
  // Clones take the place of the inlined call, in the callee's order.
  auto Pos = std::find(Caller.CallSites.begin(), Caller.CallSites.end(), S);
  Pos = Caller.CallSites.erase(Pos);
  Caller.CallSites.insert(Pos, Out.ClonedCallSites.begin(),
                          Out.ClonedCallSites.end());

  --Callee.Users;
  std::int64_t DeletedSize = 0;
  if (Callee.Users == 0 && Callee.Link == Linkage::Internal) {
    DeletedSize = Callee.Size;
    eraseFunction(CalleeRef);
    Out.CalleeDeleted = true;
  }
  Out.StepReward = CallerBefore - Caller.Size + DeletedSize;
  return Out;
}

bool ModuleGraph::deleteIfDead(FuncRef F) {
  if (index(F) >= Functions.size())
    throw Error(ErrorKind::UnknownFunction,
                "function #" + std::to_string(index(F)) + " does not exist");
  const FunctionDef &Fn = Functions[index(F)];
  if (!Fn.Live || Fn.Users != 0 || Fn.Link != Linkage::Internal)
    return false;
  eraseFunction(F);
  return true;
}

std::int64_t ModuleGraph::recomputeSize() const {
  std::int64_t Total = 0;
  for (const FunctionDef &F : Functions)
    if (F.Live)
      Total += F.Size;
  return Total;
}

std::vector<std::int64_t> ModuleGraph::recomputeUsers() const {
  std::vector<std::int64_t> Users(Functions.size(), 0);
  for (const FunctionDef &F : Functions) {
    if (!F.Live)
      continue;
    for (SiteRef S : F.CallSites)
      ++Users[index(callSite(S).Callee)];
  }
  return Users;
}

std::vector<std::string> ModuleGraph::validate() const {
  std::vector<std::string> Out = inlinesim::validate(toDesc());
  if (recomputeSize() != TotalSize)
    Out.push_back("incremental module size " + std::to_string(TotalSize) +
                  " differs from recomputed " + std::to_string(recomputeSize()));
  auto Users = recomputeUsers();
  std::size_t Functions_ = 0, Sites_ = 0;
  for (std::size_t I = 0; I < Functions.size(); ++I) {
    const FunctionDef &F = Functions[I];
    if (!F.Live)
      continue;
    ++Functions_;
    if (Users[I] != F.Users)
      Out.push_back("function '" + F.Id + "': user count " +
                    std::to_string(F.Users) + " differs from recomputed " +
                    std::to_string(Users[I]));
    for (SiteRef S : F.CallSites) {
      ++Sites_;
      const CallSite &C = callSite(S);
      if (!C.Live || index(C.Caller) != I || !function(C.Callee).Live)
        Out.push_back("call site '" + C.Id + "' has a stale caller or callee");
    }
  }
  if (Functions_ != LiveFunctions || Sites_ != LiveCallSites)
    Out.push_back("live function or call site counters are stale");
  return Out;
}
