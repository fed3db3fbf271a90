//===- CorpusGen.cpp - Seeded synthetic module corpora --------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/CorpusGen.h"
#include "inlinesim/Error.h"
#include "inlinesim/ModuleIO.h"
#include "inlinesim/Rng.h"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <unistd.h>

using namespace inlinesim;
using Json = nlohmann::ordered_json;

static void checkRange(const IntRange &R, std::int64_t Min, const char *Name) {
  if (R.Lo > R.Hi)
    throw Error(ErrorKind::Params, fmt::format("{} range is empty", Name));
  if (R.Lo < Min)
    throw Error(ErrorKind::Params,
                fmt::format("{} range must start at {} or above", Name, Min));
}

static void checkProbability(double P, const char *Name) {
  if (!(P >= 0.0 && P <= 1.0))
    throw Error(ErrorKind::Params, fmt::format("{} must be in [0, 1]", Name));
}

void inlinesim::checkParams(const CorpusParams &P) {
  if (P.ModuleCount < 0)
    throw Error(ErrorKind::Params, "module count is negative");
  checkRange(P.FunctionsPerModule, 2, "functions per module");
  checkRange(P.Size, 1, "size");
  checkRange(P.ParamCount, 0, "param count");
  checkRange(P.CallSitesPerFunction, 0, "call sites per function");
  if (P.Size.Lo - 1 < P.CallSitesPerFunction.Lo)
    throw Error(ErrorKind::Params,
                "size range too small to hold the minimum call sites plus one "
                "instruction");
  checkProbability(P.ConstArgProbability, "const arg probability");
  checkProbability(P.InternalLinkageProbability, "internal linkage probability");
  checkProbability(P.BackEdgeProbability, "back edge probability");
  checkProbability(P.SavingsFractionLo, "savings fraction");
  checkProbability(P.SavingsFractionHi, "savings fraction");
  if (P.SavingsFractionLo > P.SavingsFractionHi)
    throw Error(ErrorKind::Params, "savings fraction range is empty");
  if (!(P.GrowthCap.num() > P.GrowthCap.den()))
    throw Error(ErrorKind::Params, "growth cap must exceed 1");
}

static std::string paddedName(char Prefix, std::int64_t I, std::int64_t Count) {
  int Width = std::max<int>(2, static_cast<int>(std::to_string(
                                   std::max<std::int64_t>(Count - 1, 0)).size()));
  return fmt::format("{}{:0{}}", Prefix, I, Width);
}

ModuleDesc inlinesim::generateModule(const CorpusParams &P, std::int64_t Index) {
  checkParams(P);
  Rng R = Rng(P.Seed).split(static_cast<std::uint64_t>(Index));

  ModuleDesc M;
  M.Name = fmt::format("m{:04}", Index);
  M.GrowthCap = P.GrowthCap;
  const std::int64_t N =
      R.uniformInt(P.FunctionsPerModule.Lo, P.FunctionsPerModule.Hi);

  // Shape first: sizes, parameters, call-site counts.
  M.Functions.resize(static_cast<std::size_t>(N));
  for (std::int64_t K = 0; K < N; ++K) {
    FunctionDesc &F = M.Functions[K];
    F.Id = paddedName('f', K, N);
    F.Size = R.uniformInt(P.Size.Lo, P.Size.Hi);
    F.BasicBlocks = R.uniformInt(1, std::max<std::int64_t>(1, F.Size / 4));
    F.ConditionalBlocks = R.uniformInt(0, F.BasicBlocks - 1);
    F.ParamCount = R.uniformInt(P.ParamCount.Lo, P.ParamCount.Hi);
  }

  // Edges: forward to a deeper function, or back to a shallower one (which
  // may be the caller itself) with the back-edge probability.
  std::int64_t NextSite = 0;
  std::vector<std::int64_t> Users(static_cast<std::size_t>(N), 0);
  for (std::int64_t K = 0; K < N; ++K) {
    FunctionDesc &F = M.Functions[K];
    std::int64_t Want = R.uniformInt(
        P.CallSitesPerFunction.Lo,
        std::min(P.CallSitesPerFunction.Hi, F.Size - 1));
    for (std::int64_t J = 0; J < Want; ++J) {
      bool Back = R.bernoulli(P.BackEdgeProbability);
      if (!Back && K == N - 1)
        continue; // The deepest function has nothing below it.
      std::int64_t Callee =
          Back ? R.uniformInt(0, K) : R.uniformInt(K + 1, N - 1);
      CallSiteDesc C;
      C.Id = fmt::format("c{}", NextSite++);
      C.Callee = M.Functions[Callee].Id;
      for (std::int64_t Arg = 0; Arg < M.Functions[Callee].ParamCount; ++Arg)
        C.ConstArgs.push_back(R.bernoulli(P.ConstArgProbability));
      ++Users[Callee];
      F.CallSites.push_back(std::move(C));
    }
  }
  if (NextSite == 0) {
    CallSiteDesc C;
    C.Id = "c0";
    C.Callee = M.Functions[1].Id;
    C.ConstArgs.assign(static_cast<std::size_t>(M.Functions[1].ParamCount), false);
    ++Users[1];
    if (M.Functions[0].Size < 2)
      M.Functions[0].Size = 2;
    M.Functions[0].CallSites.push_back(std::move(C));
  }

  // Linkage and savings depend on the finished edge set. Functions nobody
  // calls are entry points and stay external.
  for (std::int64_t K = 0; K < N; ++K) {
    FunctionDesc &F = M.Functions[K];
    bool Internal = R.bernoulli(P.InternalLinkageProbability);
    F.Link = Users[K] > 0 && Internal ? Linkage::Internal : Linkage::External;
    double Fraction = P.SavingsFractionLo +
                      (P.SavingsFractionHi - P.SavingsFractionLo) * R.uniform01();
    auto MaxSaving = static_cast<std::int64_t>(Fraction * static_cast<double>(F.Size));
    std::int64_t Budget =
        F.Size - static_cast<std::int64_t>(F.CallSites.size()) - 1;
    for (std::int64_t Arg = 0; Arg < F.ParamCount; ++Arg) {
      std::int64_t S = std::min(R.uniformInt(0, MaxSaving), Budget);
      Budget -= S;
      F.ParamSavings.push_back(S);
    }
  }
  return M;
}

std::vector<ModuleDesc> inlinesim::generateCorpus(const CorpusParams &P) {
  checkParams(P);
  std::vector<ModuleDesc> Out;
  Out.reserve(static_cast<std::size_t>(P.ModuleCount));
  for (std::int64_t I = 0; I < P.ModuleCount; ++I)
    Out.push_back(generateModule(P, I));
  return Out;
}

std::string inlinesim::corpusManifestJson(const std::vector<ModuleDesc> &Modules,
                                          const CorpusParams &P) {
  Json Params;
  Params["seed"] = P.Seed;
  Params["module_count"] = P.ModuleCount;
  Params["functions_per_module"] = {P.FunctionsPerModule.Lo,
                                    P.FunctionsPerModule.Hi};
  Params["size"] = {P.Size.Lo, P.Size.Hi};
  Params["param_count"] = {P.ParamCount.Lo, P.ParamCount.Hi};
  Params["call_sites_per_function"] = {P.CallSitesPerFunction.Lo,
                                       P.CallSitesPerFunction.Hi};
  Params["const_arg_probability"] = P.ConstArgProbability;
  Params["internal_linkage_probability"] = P.InternalLinkageProbability;
  Params["back_edge_probability"] = P.BackEdgeProbability;
  Params["savings_fraction"] = {P.SavingsFractionLo, P.SavingsFractionHi};
  Params["growth_cap_factor"] = P.GrowthCap.str();
  Json Ids = Json::array();
  for (const ModuleDesc &M : Modules)
    Ids.push_back(M.Name);
  Json J;
  J["format_version"] = 1;
  J["seed"] = P.Seed;
  J["params"] = std::move(Params);
  J["modules"] = std::move(Ids);
  return J.dump(2) + "\n";
}

void inlinesim::writeCorpusDir(const std::filesystem::path &Dir,
                               const std::vector<ModuleDesc> &Modules,
                               const CorpusParams &P) {
  namespace fs = std::filesystem;
  fs::path Target = fs::absolute(Dir).lexically_normal();
  if (Target.filename().empty())
    Target = Target.parent_path();
  fs::path Tmp = Target;
  Tmp += fmt::format(".tmp.{}", ::getpid());
  std::error_code Ec;
  fs::remove_all(Tmp, Ec);
  if (!fs::create_directories(Tmp, Ec) || Ec)
    throw Error(ErrorKind::Data, "cannot create '" + Tmp.string() + "'");
  try {
    for (const ModuleDesc &M : Modules)
      writeFileAtomic(Tmp / (M.Name + ".module"), printModule(M));
    writeFileAtomic(Tmp / "manifest.json", corpusManifestJson(Modules, P));
    if (fs::exists(Target))
      throw Error(ErrorKind::Data,
                  "output directory '" + Target.string() + "' already exists");
    fs::rename(Tmp, Target);
  } catch (...) {
    fs::remove_all(Tmp, Ec);
    throw;
  }
}

std::vector<ModuleDesc> inlinesim::readCorpusDir(const std::filesystem::path &Dir) {
  Json Manifest;
  try {
    Manifest = Json::parse(readFile(Dir / "manifest.json"));
  } catch (const Json::exception &E) {
    throw Error(ErrorKind::Parse, "manifest.json: " + std::string(E.what()));
  }
  if (!Manifest.contains("modules") || !Manifest["modules"].is_array())
    throw Error(ErrorKind::Parse, "manifest.json: missing module list");
  std::vector<ModuleDesc> Out;
  for (const Json &Id : Manifest["modules"]) {
    if (!Id.is_string())
      throw Error(ErrorKind::Parse, "manifest.json: module ids must be strings");
    Out.push_back(readModuleFile(Dir / (Id.get<std::string>() + ".module")));
  }
  return Out;
}
