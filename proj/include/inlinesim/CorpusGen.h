//===- CorpusGen.h - Seeded synthetic module corpora ------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Generates pre-inlining modules whose call graphs are mostly layered:
// function k calls functions with larger indices, except for occasional back
// edges that close cycles. Each module draws from its own stream derived from
// (seed, module index), so a corpus is a pure function of its parameters.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_CORPUSGEN_H
#define INLINESIM_CORPUSGEN_H

#include "inlinesim/ModuleGraph.h"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace inlinesim {

struct IntRange {
  std::int64_t Lo = 0;
  std::int64_t Hi = 0;
};

struct CorpusParams {
  std::uint64_t Seed = 0;
  std::int64_t ModuleCount = 200;
  IntRange FunctionsPerModule{8, 40};
  IntRange Size{3, 60};
  IntRange ParamCount{0, 4};
  /// Drawn per function, then limited to size - 1.
  IntRange CallSitesPerFunction{0, 4};
  double ConstArgProbability = 0.3;
  double InternalLinkageProbability = 0.7;
  double BackEdgeProbability = 0.05;
  /// Each parameter's saving is drawn from [0, fraction * size] with the
  /// fraction drawn per function from this range.
  double SavingsFractionLo = 0.0;
  double SavingsFractionHi = 0.5;
  Ratio GrowthCap{3, 2};
};

/// Throws Error(Params) describing the first infeasible setting.
void checkParams(const CorpusParams &P);

/// One module; \p Index selects the stream.
ModuleDesc generateModule(const CorpusParams &P, std::int64_t Index);
std::vector<ModuleDesc> generateCorpus(const CorpusParams &P);

/// Writes <dir>/<module>.module files plus manifest.json. The directory is
/// assembled under a temporary name and renamed into place.
void writeCorpusDir(const std::filesystem::path &Dir,
                    const std::vector<ModuleDesc> &Modules,
                    const CorpusParams &P);
/// Loads the modules listed in <dir>/manifest.json, in manifest order.
std::vector<ModuleDesc> readCorpusDir(const std::filesystem::path &Dir);

std::string corpusManifestJson(const std::vector<ModuleDesc> &Modules,
                               const CorpusParams &P);

} // namespace inlinesim

#endif // INLINESIM_CORPUSGEN_H
