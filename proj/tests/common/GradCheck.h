//===- GradCheck.h - Finite-difference reference gradients -----*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_TESTS_GRADCHECK_H
#define INLINESIM_TESTS_GRADCHECK_H

#include "inlinesim/Policy.h"
#include "inlinesim/Rng.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace inlinesim::test {

inline constexpr double FdStep = 1e-5;
/// Coordinates smaller than this are compared on this scale instead of
/// their own magnitude.
inline constexpr double RelErrFloor = 1e-6;

inline double relativeError(double Analytic, double Numeric) {
  double Scale = std::max({std::abs(Analytic), std::abs(Numeric), RelErrFloor});
  return std::abs(Analytic - Numeric) / Scale;
}

inline FeatureVector randomFeatures(Rng &R) {
  FeatureVector F;
  for (auto &X : F.Values)
    X = R.uniformInt(0, 60);
  return F;
}

/// Random architecture, normalization and parameters, all non-degenerate.
inline MlpPolicy randomPolicy(Rng &R) {
  static const std::vector<std::vector<std::size_t>> Shapes{
      {11, 40, 20, 2}, {11, 20, 20, 20, 20, 2}, {11, 7, 2}, {11, 2}};
  const auto &Dims = Shapes[static_cast<std::size_t>(R.uniformInt(0, 3))];
  FeatureStats S;
  for (std::size_t I = 0; I < NumFeatures; ++I) {
    S.Mean[I] = 30.0 * R.uniform01();
    S.Std[I] = 1.0 + 20.0 * R.uniform01();
  }
  S.Samples = 1;
  MlpPolicy P(Dims, S);
  ParamVector Theta(P.paramCount());
  for (double &X : Theta)
    X = 0.5 * R.normal();
  P.setParams(Theta);
  return P;
}

/// Largest per-coordinate relative error between the analytic gradient of
/// \p Objective and central differences of it.
template <typename Fn>
double maxGradientError(const MlpPolicy &P, const ParamVector &Analytic,
                        Fn Objective) {
  double Worst = 0;
  ParamVector Theta = P.params();
  MlpPolicy Probe = P;
  for (std::size_t K = 0; K < Theta.size(); ++K) {
    const double Saved = Theta[K];
    Theta[K] = Saved + FdStep;
    Probe.setParams(Theta);
    const double Up = Objective(Probe);
    Theta[K] = Saved - FdStep;
    Probe.setParams(Theta);
    const double Down = Objective(Probe);
    Theta[K] = Saved;
    Worst = std::max(Worst, relativeError(Analytic[K], (Up - Down) / (2 * FdStep)));
  }
  return Worst;
}

/// log p computed from the smaller probability, which keeps full relative
/// precision when the policy is nearly deterministic.
inline double safeLog(const std::array<double, 2> &Pr, int A) {
  return Pr[A] > 0.5 ? std::log1p(-Pr[1 - A]) : std::log(Pr[A]);
}

inline double logProb(const MlpPolicy &P, const FeatureVector &F, Action A) {
  return safeLog(P.forward(F), toInt(A));
}

inline double entropy(const MlpPolicy &P, const FeatureVector &F) {
  auto Pr = P.forward(F);
  return -(Pr[0] * safeLog(Pr, 0) + Pr[1] * safeLog(Pr, 1));
}

} // namespace inlinesim::test

#endif // INLINESIM_TESTS_GRADCHECK_H
