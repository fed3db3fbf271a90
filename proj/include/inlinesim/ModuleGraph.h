//===- ModuleGraph.h - Call-graph model of a compilation unit ---*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// A module is a set of functions, each with an instruction count, block
// counts, per-parameter constant-folding savings and an ordered list of call
// sites. The native size of a function is its instruction count. Inlining a
// call site splices the callee's body (minus constant-argument savings) into
// the caller, clones the callee's call sites, and deletes the callee when its
// last in-module user goes away and its linkage is internal.
//
// ModuleDesc is the plain value read from and written to module files;
// ModuleGraph is the indexed, mutable form that maintains module size and
// user counts incrementally.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_MODULEGRAPH_H
#define INLINESIM_MODULEGRAPH_H

#include "inlinesim/Ratio.h"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace inlinesim {

enum class Linkage { Internal, External };

struct CallSiteDesc {
  std::string Id;
  std::string Callee;
  std::vector<bool> ConstArgs;

  friend bool operator==(const CallSiteDesc &, const CallSiteDesc &) = default;
};

struct FunctionDesc {
  std::string Id;
  Linkage Link = Linkage::Internal;
  std::int64_t Size = 1;
  std::int64_t BasicBlocks = 1;
  std::int64_t ConditionalBlocks = 0;
  std::int64_t ParamCount = 0;
  std::vector<std::int64_t> ParamSavings;
  std::vector<CallSiteDesc> CallSites;

  friend bool operator==(const FunctionDesc &, const FunctionDesc &) = default;
};

struct ModuleDesc {
  std::string Name;
  Ratio GrowthCap{3, 2};
  std::vector<FunctionDesc> Functions;

  friend bool operator==(const ModuleDesc &, const ModuleDesc &) = default;
};

/// All invariant violations of \p M, one message each. Empty means valid.
std::vector<std::string> validate(const ModuleDesc &M);

enum class FuncRef : std::uint32_t {};
enum class SiteRef : std::uint32_t {};

inline std::size_t index(FuncRef F) { return static_cast<std::size_t>(F); }
inline std::size_t index(SiteRef S) { return static_cast<std::size_t>(S); }

struct CallSite {
  std::string Id;
  FuncRef Caller;
  FuncRef Callee;
  std::vector<bool> ConstArgs;
  bool Live = true;
};

struct FunctionDef {
  std::string Id;
  Linkage Link = Linkage::Internal;
  std::int64_t Size = 1;
  std::int64_t BasicBlocks = 1;
  std::int64_t ConditionalBlocks = 0;
  std::int64_t ParamCount = 0;
  std::vector<std::int64_t> ParamSavings;
  /// Live call sites in declaration order.
  std::vector<SiteRef> CallSites;
  /// In-module call sites targeting this function.
  std::int64_t Users = 0;
  bool Live = true;
};

struct InlineOutcome {
  std::int64_t StepReward = 0;
  bool CalleeDeleted = false;
  std::vector<SiteRef> ClonedCallSites;
};

/// The call graph as it was when the module was built. Traversal order,
/// recursion checks and call-site heights all key off this snapshot, never
/// off the mutated graph.
struct InitialCallGraph {
  /// Distinct callees per function, first-occurrence order.
  std::vector<std::vector<FuncRef>> Successors;
  std::vector<std::uint32_t> SccOf;
  /// Strongly connected components, callees before callers. Members of each
  /// component are in ascending id order.
  std::vector<std::vector<FuncRef>> Sccs;
};

/// Tarjan's algorithm over \p Successors, rooted in index order. Components
/// come out callee-first (reverse topological order of the condensation).
InitialCallGraph condense(std::vector<std::vector<FuncRef>> Successors);

class ModuleGraph {
public:
  /// Throws Error(Load) listing every violation when \p Desc is invalid.
  static ModuleGraph build(const ModuleDesc &Desc);

  /// The live part of the module, functions in id order.
  ModuleDesc toDesc() const;

  const std::string &name() const { return Name; }
  Ratio growthCap() const { return GrowthCap; }
  std::int64_t size() const { return TotalSize; }
  std::int64_t initialSize() const { return InitialSize; }
  std::size_t liveFunctionCount() const { return LiveFunctions; }
  std::size_t liveCallSiteCount() const { return LiveCallSites; }

  /// Every function slot, including deleted ones, in id order.
  std::span<const FunctionDef> functions() const { return Functions; }
  const FunctionDef &function(FuncRef F) const { return Functions[index(F)]; }
  const CallSite &callSite(SiteRef S) const { return Sites[index(S)]; }
  std::size_t callSiteSlots() const { return Sites.size(); }

  std::optional<FuncRef> findFunction(std::string_view Id) const;
  std::optional<SiteRef> findCallSite(std::string_view Id) const;

  const InitialCallGraph &initialGraph() const { return *Initial; }
  bool sameInitialScc(FuncRef A, FuncRef B) const {
    return Initial->SccOf[index(A)] == Initial->SccOf[index(B)];
  }
  bool isLive(SiteRef S) const;

  /// Instructions removed from the callee body by the constant arguments of
  /// \p S.
  std::int64_t constantSavings(const CallSite &S) const;

  /// Inlines \p S into its caller. Throws Error(InvalidCallSite) for a dead
  /// or out-of-range site and Error(RecursionRefused) for an edge inside one
  /// strongly connected component of the initial graph.
  InlineOutcome inlineCallSite(SiteRef S);

  /// Deletes \p F iff it is internal and has no users. Throws
  /// Error(UnknownFunction) for an out-of-range reference.
  bool deleteIfDead(FuncRef F);

  /// From-scratch recomputations used to audit the incremental bookkeeping.
  std::int64_t recomputeSize() const;
  std::vector<std::int64_t> recomputeUsers() const;

  /// Descriptor invariants of the live module plus bookkeeping consistency.
  std::vector<std::string> validate() const;

private:
  ModuleGraph() = default;
  void eraseFunction(FuncRef F);
  std::string freshCloneId(const std::string &Base);

  std::string Name;
  Ratio GrowthCap{3, 2};
  std::vector<FunctionDef> Functions;
  std::vector<CallSite> Sites;
  std::shared_ptr<const InitialCallGraph> Initial;
  std::int64_t TotalSize = 0;
  std::int64_t InitialSize = 0;
  std::size_t LiveFunctions = 0;
  std::size_t LiveCallSites = 0;
  std::uint64_t CloneCounter = 0;
};

/// Sum of live function sizes.
inline std::int64_t moduleSize(const ModuleGraph &M) { return M.size(); }

} // namespace inlinesim

#endif // INLINESIM_MODULEGRAPH_H
