//===- Policy.h - Feed-forward inlining policy ------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// A small multilayer perceptron mapping the eleven call-site features to a
// distribution over {don't inline, inline}. Features are z-normalized with
// statistics stored in the policy itself, hidden layers use a rectifier, and
// the two output logits go through a softmax. Gradients are computed by hand
// so they can be checked against finite differences.
//
// Parameters are kept as one flat vector: for each layer, the weight matrix
// (output-major) followed by the bias vector.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_POLICY_H
#define INLINESIM_POLICY_H

#include "inlinesim/Features.h"
#include "inlinesim/Heuristic.h"
#include "inlinesim/Rng.h"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inlinesim {

using ParamVector = std::vector<double>;

enum class ActMode { Sample, Argmax };

inline constexpr int PolicyFormatVersion = 1;

class MlpPolicy {
public:
  /// All parameters zero: the uniform policy. Throws Error(Load) on bad dims.
  MlpPolicy(std::vector<std::size_t> Dims, FeatureStats Stats);

  /// Hidden weights uniform in +-sqrt(6 / (fan_in + fan_out)); biases and the
  /// output layer start at zero, so the initial policy is uniform.
  static MlpPolicy initialize(std::vector<std::size_t> Dims, FeatureStats Stats,
                              Rng &R);

  const std::vector<std::size_t> &dims() const { return Dims; }
  const FeatureStats &stats() const { return Stats; }
  std::size_t paramCount() const { return Params.size(); }
  const ParamVector &params() const { return Params; }
  /// Throws Error(Load) on length mismatch and Error(Numeric) on non-finite
  /// values.
  void setParams(ParamVector P);

  /// (pi(don't inline), pi(inline)). Throws Error(Numeric) if any
  /// intermediate is non-finite.
  std::array<double, 2> forward(const FeatureVector &F) const;

  /// Argmax ties go to DontInline. \p R is only used in sample mode.
  Action act(const FeatureVector &F, ActMode Mode, Rng *R) const;

  /// log pi(A | F) and its gradient with respect to every parameter.
  std::pair<double, ParamVector> logProbGrad(const FeatureVector &F,
                                             Action A) const;

  /// Adds Scale * d log pi(A | F) / d theta into \p Accum; returns log pi.
  double accumulateLogProbGrad(const FeatureVector &F, Action A, double Scale,
                               std::span<double> Accum) const;
  /// Adds Scale * d H(pi(. | F)) / d theta into \p Accum; returns the entropy.
  double accumulateEntropyGrad(const FeatureVector &F, double Scale,
                               std::span<double> Accum) const;

  friend bool operator==(const MlpPolicy &, const MlpPolicy &) = default;

private:
  struct Activations {
    /// Inputs to each layer; Inputs[0] is the normalized feature vector.
    std::vector<std::vector<double>> Inputs;
    std::array<double, 2> Logits;
    std::array<double, 2> LogProbs;
  };

  Activations run(const FeatureVector &F) const;
  void backward(const Activations &Acts, std::array<double, 2> LogitGrad,
                double Scale, std::span<double> Accum) const;

  std::vector<std::size_t> Dims;
  FeatureStats Stats;
  ParamVector Params;
};

std::string serializePolicy(const MlpPolicy &P);
/// Throws Error(Parse) for malformed or truncated text and Error(Load) for
/// version, shape or finiteness violations.
MlpPolicy deserializePolicy(std::string_view Text);

/// Human-readable dims, parameter count and a digest of the normalization
/// statistics.
std::string describePolicy(const MlpPolicy &P);

/// Gradient ascent on a flat parameter vector.
enum class OptimizerKind { Adam, Sgd };

class GradientAscent {
public:
  GradientAscent(OptimizerKind Kind, double LearningRate, std::size_t Size);

  /// Params += update(Grad).
  void step(std::span<double> Params, std::span<const double> Grad);

private:
  OptimizerKind Kind;
  double LearningRate;
  std::vector<double> M, V;
  std::uint64_t T = 0;
};

} // namespace inlinesim

#endif // INLINESIM_POLICY_H
