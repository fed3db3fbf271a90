//===- PolicyTest.cpp - MLP policy, gradients and serialization -----------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "GradCheck.h"

#include "inlinesim/Error.h"
#include "inlinesim/Policy.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace inlinesim;
using namespace inlinesim::test;

namespace {

const std::vector<std::size_t> Dims{11, 40, 20, 2};

MlpPolicy zeroPolicy() { return MlpPolicy(Dims, identityStats()); }

/// Zero network whose output biases are \p B0 and \p B1, so the logits are
/// exactly (B0, B1) for every input.
MlpPolicy biasOnly(double B0, double B1) {
  MlpPolicy P = zeroPolicy();
  ParamVector T = P.params();
  T[T.size() - 2] = B0;
  T[T.size() - 1] = B1;
  P.setParams(T);
  return P;
}

ErrorKind kindOf(auto Fn) {
  try {
    Fn();
  } catch (const Error &E) {
    return E.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::Usage;
}

TEST(Forward, ZeroNetworkIsUniform) {
  Rng R(1);
  MlpPolicy P = zeroPolicy();
  EXPECT_EQ(P.paramCount(), 40u * 12 + 20 * 41 + 2 * 21);
  for (int I = 0; I < 20; ++I) {
    auto Pr = P.forward(randomFeatures(R));
    EXPECT_EQ(Pr[0], 0.5);
    EXPECT_EQ(Pr[1], 0.5);
  }
}

TEST(Forward, SoftmaxClosedForm) {
  auto Pr = biasOnly(0, std::log(3.0)).forward(FeatureVector{});
  EXPECT_NEAR(Pr[0], 0.25, 1e-12);
  EXPECT_NEAR(Pr[1], 0.75, 1e-12);
}

TEST(Forward, ProbabilitiesArePositiveAndSumToOne) {
  Rng R(2);
  for (int I = 0; I < 200; ++I) {
    MlpPolicy P = randomPolicy(R);
    auto Pr = P.forward(randomFeatures(R));
    EXPECT_GT(Pr[0], 0);
    EXPECT_GT(Pr[1], 0);
    EXPECT_NEAR(Pr[0] + Pr[1], 1.0, 1e-12);
  }
}

TEST(Forward, TranslationInvariance) {
  Rng R(3);
  for (int I = 0; I < 50; ++I) {
    MlpPolicy P = randomPolicy(R);
    FeatureVector F = randomFeatures(R);
    ParamVector T = P.params();
    double C = 10 * R.normal();
    T[T.size() - 2] += C;
    T[T.size() - 1] += C;
    MlpPolicy Q = P;
    Q.setParams(T);
    auto A = P.forward(F), B = Q.forward(F);
    EXPECT_NEAR(A[0], B[0], 1e-12);
    EXPECT_NEAR(A[1], B[1], 1e-12);
  }
}

TEST(Forward, IsPure) {
  Rng R(4);
  MlpPolicy P = randomPolicy(R);
  MlpPolicy Copy = P;
  FeatureVector F = randomFeatures(R);
  auto A = P.forward(F);
  for (int I = 0; I < 5; ++I)
    P.forward(randomFeatures(R));
  EXPECT_EQ(P.forward(F), A);
  EXPECT_EQ(P, Copy);
}

TEST(Forward, ExtremeLogitsStayFinite) {
  auto Pr = biasOnly(0, 800).forward(FeatureVector{});
  EXPECT_EQ(Pr[1], 1.0);
  EXPECT_GE(Pr[0], 0.0);
}

TEST(Act, ArgmaxTiesGoToDontInline) {
  EXPECT_EQ(zeroPolicy().act(FeatureVector{}, ActMode::Argmax, nullptr),
            Action::DontInline);
  EXPECT_EQ(biasOnly(0, std::log(9.0)).act(FeatureVector{}, ActMode::Argmax, nullptr),
            Action::Inline);
  EXPECT_EQ(biasOnly(std::log(9.0), 0).act(FeatureVector{}, ActMode::Argmax, nullptr),
            Action::DontInline);
}

TEST(Act, SamplingIsSeededAndMatchesProbabilities) {
  MlpPolicy P = biasOnly(0, std::log(3.0));
  auto Draw = [&](std::uint64_t Seed) {
    Rng R(Seed);
    std::vector<Action> Out;
    for (int I = 0; I < 4000; ++I)
      Out.push_back(P.act(FeatureVector{}, ActMode::Sample, &R));
    return Out;
  };
  auto A = Draw(11);
  EXPECT_EQ(A, Draw(11));
  EXPECT_NE(A, Draw(12));
  double Ones = static_cast<double>(std::count(A.begin(), A.end(), Action::Inline));
  // 0.75 +- 4 standard errors.
  EXPECT_NEAR(Ones / 4000, 0.75, 4 * std::sqrt(0.75 * 0.25 / 4000));
}

TEST(LogProbGrad, ZeroNetworkOutputBiases) {
  MlpPolicy P = zeroPolicy();
  for (Action A : {Action::Inline, Action::DontInline}) {
    auto [LogP, G] = P.logProbGrad(FeatureVector{}, A);
    EXPECT_DOUBLE_EQ(LogP, std::log(0.5));
    double Sign = A == Action::Inline ? 1 : -1;
    EXPECT_DOUBLE_EQ(G[G.size() - 2], -0.5 * Sign);
    EXPECT_DOUBLE_EQ(G[G.size() - 1], 0.5 * Sign);
    // Zero hidden activations: nothing else moves.
    for (std::size_t K = 0; K + 2 < G.size(); ++K)
      ASSERT_EQ(G[K], 0.0);
  }
}

TEST(LogProbGrad, MatchesFiniteDifferences) {
  Rng R(20);
  for (int I = 0; I < 100; ++I) {
    MlpPolicy P = randomPolicy(R);
    FeatureVector F = randomFeatures(R);
    Action A = R.bernoulli(0.5) ? Action::Inline : Action::DontInline;
    auto [LogP, G] = P.logProbGrad(F, A);
    EXPECT_NEAR(LogP, logProb(P, F, A), 1e-12);
    double Err = maxGradientError(
        P, G, [&](const MlpPolicy &Q) { return logProb(Q, F, A); });
    ASSERT_LE(Err, 1e-4) << "triple " << I;
  }
}

TEST(LogProbGrad, AccumulateScales) {
  Rng R(21);
  MlpPolicy P = randomPolicy(R);
  FeatureVector F = randomFeatures(R);
  auto [LogP, G] = P.logProbGrad(F, Action::Inline);
  ParamVector Acc(P.paramCount(), 1.0);
  EXPECT_EQ(P.accumulateLogProbGrad(F, Action::Inline, -2.5, Acc), LogP);
  for (std::size_t K = 0; K < G.size(); ++K)
    ASSERT_DOUBLE_EQ(Acc[K], 1.0 - 2.5 * G[K]);
}

TEST(EntropyGrad, MatchesFiniteDifferences) {
  Rng R(22);
  for (int I = 0; I < 40; ++I) {
    MlpPolicy P = randomPolicy(R);
    FeatureVector F = randomFeatures(R);
    ParamVector G(P.paramCount(), 0.0);
    double H = P.accumulateEntropyGrad(F, 1.0, G);
    EXPECT_NEAR(H, entropy(P, F), 1e-12);
    ASSERT_LE(maxGradientError(P, G, [&](const MlpPolicy &Q) { return entropy(Q, F); }),
              1e-4);
  }
}

TEST(Policy, RejectsBadShapesAndValues) {
  EXPECT_EQ(kindOf([] { MlpPolicy({12, 4, 2}, identityStats()); }), ErrorKind::Load);
  EXPECT_EQ(kindOf([] { MlpPolicy({11, 4, 3}, identityStats()); }), ErrorKind::Load);
  EXPECT_EQ(kindOf([] { MlpPolicy({11, 0, 2}, identityStats()); }), ErrorKind::Load);
  EXPECT_EQ(kindOf([] { MlpPolicy({11}, identityStats()); }), ErrorKind::Load);
  MlpPolicy P = zeroPolicy();
  ParamVector T = P.params();
  EXPECT_EQ(kindOf([&] { P.setParams(ParamVector(3)); }), ErrorKind::Load);
  T[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kindOf([&] { P.setParams(T); }), ErrorKind::Numeric);
}

TEST(Serialize, RoundTripIsExact) {
  Rng R(30);
  for (int I = 0; I < 20; ++I) {
    MlpPolicy P = randomPolicy(R);
    std::string Text = serializePolicy(P);
    MlpPolicy Q = deserializePolicy(Text);
    ASSERT_EQ(Q, P);
    ASSERT_EQ(serializePolicy(Q), Text);
    for (int K = 0; K < 100; ++K) {
      FeatureVector F = randomFeatures(R);
      ASSERT_EQ(P.forward(F), Q.forward(F));
    }
  }
}

TEST(Serialize, Rejections) {
  Rng R(31);
  MlpPolicy P = MlpPolicy::initialize({11, 3, 2}, identityStats(), R);
  std::string Text = serializePolicy(P);
  auto Replace = [&](const std::string &From, const std::string &To) {
    std::string S = Text;
    S.replace(S.find(From), From.size(), To);
    return S;
  };
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("dims 11 3 2", "dims 12 3 2")); }),
            ErrorKind::Load);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("format_version 1", "format_version 2")); }),
            ErrorKind::Load);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("layer 1 bias 0 0", "layer 1 bias 0 nan")); }),
            ErrorKind::Load);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("layer 1 bias 0 0", "layer 1 bias 0 inf")); }),
            ErrorKind::Load);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Text.substr(0, Text.size() / 2)); }),
            ErrorKind::Parse);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("\nend\n", "\n")); }),
            ErrorKind::Parse);
  EXPECT_EQ(kindOf([&] { deserializePolicy(Replace("layer 1 bias 0 0", "layer 1 bias 0")); }),
            ErrorKind::Parse);
  EXPECT_EQ(kindOf([&] { deserializePolicy(""); }), ErrorKind::Parse);
}

TEST(Describe, ReportsShapeAndDigest) {
  MlpPolicy P = zeroPolicy();
  std::string D = describePolicy(P);
  EXPECT_NE(D.find("dims 11x40x20x2"), std::string::npos);
  EXPECT_NE(D.find("parameters 1342"), std::string::npos);
  FeatureStats S = identityStats();
  S.Mean[3] = 1;
  EXPECT_NE(describePolicy(MlpPolicy(Dims, S)), D);
}

TEST(Initialize, GlorotHiddenZeroOutput) {
  Rng R(40);
  MlpPolicy P = MlpPolicy::initialize(Dims, identityStats(), R);
  const ParamVector &T = P.params();
  const double L0 = std::sqrt(6.0 / 51), L1 = std::sqrt(6.0 / 60);
  std::size_t K = 0;
  for (; K < 40 * 11; ++K)
    ASSERT_LE(std::abs(T[K]), L0);
  for (; K < 40 * 12; ++K)
    ASSERT_EQ(T[K], 0.0);
  for (std::size_t J = 0; J < 20 * 40; ++J, ++K)
    ASSERT_LE(std::abs(T[K]), L1);
  for (; K < T.size(); ++K)
    ASSERT_EQ(T[K], 0.0);
  EXPECT_EQ(P.forward(FeatureVector{})[1], 0.5);
}

TEST(Optimizer, SgdAndAdamSteps) {
  ParamVector Theta{1.0, -2.0, 0.5};
  ParamVector G{0.2, -4.0, 0.0};
  GradientAscent Sgd(OptimizerKind::Sgd, 0.1, 3);
  ParamVector S = Theta;
  Sgd.step(S, G);
  EXPECT_DOUBLE_EQ(S[0], 1.02);
  EXPECT_DOUBLE_EQ(S[1], -2.4);
  EXPECT_EQ(S[2], 0.5);
  // The first bias-corrected Adam step moves each coordinate by about
  // lr * sign(g).
  GradientAscent Adam(OptimizerKind::Adam, 0.1, 3);
  ParamVector A = Theta;
  Adam.step(A, G);
  EXPECT_NEAR(A[0], 1.1, 1e-6);
  EXPECT_NEAR(A[1], -2.1, 1e-6);
  EXPECT_EQ(A[2], 0.5);
}

} // namespace
