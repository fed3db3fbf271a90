//===- TrainerSupport.h - Helpers shared by the trainers --------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_SRC_TRAINERSUPPORT_H
#define INLINESIM_SRC_TRAINERSUPPORT_H

#include "inlinesim/Trainers.h"

#include <chrono>
#include <cmath>

namespace inlinesim::detail {

// Stream tags under the configured seed.
inline constexpr std::uint64_t BcStream = 1;
inline constexpr std::uint64_t PgStream = 2;
inline constexpr std::uint64_t EsStream = 3;
inline constexpr std::uint64_t InitStream = 4;

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         Start)
        .count();
  }

private:
  std::chrono::steady_clock::time_point Start = std::chrono::steady_clock::now();
};

inline std::vector<std::size_t> policyDims(const TrainerConfig &Cfg) {
  std::vector<std::size_t> Dims{NumFeatures};
  Dims.insert(Dims.end(), Cfg.HiddenLayers.begin(), Cfg.HiddenLayers.end());
  Dims.push_back(2);
  return Dims;
}

inline bool shouldEvaluate(std::int64_t Iteration, const TrainerConfig &Cfg) {
  if (Iteration == Cfg.Iterations)
    return true;
  return Cfg.EvalEvery > 0 && Iteration % Cfg.EvalEvery == 0;
}

inline void requireFinite(std::span<const double> Values, const char *What,
                          const MlpPolicy &LastGood) {
  for (double V : Values)
    if (!std::isfinite(V))
      throw NumericFailure(std::string("non-finite ") + What, LastGood);
}

/// Applies \p Grad and returns the updated policy, or throws NumericFailure
/// with \p Policy as the last good state.
inline MlpPolicy applyUpdate(const MlpPolicy &Policy, GradientAscent &Opt,
                             std::span<const double> Grad) {
  requireFinite(Grad, "gradient", Policy);
  ParamVector Params = Policy.params();
  Opt.step(Params, Grad);
  requireFinite(Params, "parameters after update", Policy);
  MlpPolicy Next = Policy;
  Next.setParams(std::move(Params));
  return Next;
}

/// Sums per-task buffers in task order.
inline ParamVector sumInOrder(const std::vector<ParamVector> &Parts,
                              std::size_t Size) {
  ParamVector Total(Size, 0.0);
  for (const ParamVector &P : Parts)
    for (std::size_t I = 0; I < Size; ++I)
      Total[I] += P[I];
  return Total;
}

} // namespace inlinesim::detail

#endif // INLINESIM_SRC_TRAINERSUPPORT_H
