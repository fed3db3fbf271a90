//===- PolicyGradient.cpp - REINFORCE with a heuristic baseline -----------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Each iteration samples modules with replacement, runs one stochastic
// episode per module, and scores it by the episode's total reward minus the
// heuristic's total reward on the same module, divided by the module's
// initial size. Every non-forced step of an episode shares that advantage.
//
//===----------------------------------------------------------------------===//

#include "TrainerSupport.h"
#include "inlinesim/Parallel.h"

using namespace inlinesim;

namespace {

struct Batch {
  std::vector<EpisodeResult> Episodes;
  std::vector<double> Advantages;
  std::size_t DecisionSteps = 0;
};

/// Adds the entropy bonus for one episode's decisions.
void addEntropy(const MlpPolicy &P, const EpisodeResult &E, double Scale,
                ParamVector &Grad) {
  if (Scale == 0.0)
    return;
  for (const StepRecord &S : E.Steps)
    if (!S.Forced)
      P.accumulateEntropyGrad(S.Features, Scale, Grad);
}

/// Gradient of the clipped surrogate min(rho A, clip(rho) A) at \p P, with
/// \p OldProbs holding the behavior policy's probability of each taken
/// action.
ParamVector clippedGradient(const MlpPolicy &P, const Batch &B,
                            const std::vector<std::vector<double>> &OldProbs,
                            const TrainerConfig &Cfg) {
  const std::size_t N = B.Episodes.size();
  const double Eps = *Cfg.PpoClip;
  const double EntropyScale =
      B.DecisionSteps ? Cfg.EntropyBonus / static_cast<double>(B.DecisionSteps)
                      : 0.0;
  std::vector<ParamVector> Parts(N);
  parallelFor(N, Cfg.Workers, [&](std::size_t I) {
    Parts[I].assign(P.paramCount(), 0.0);
    const double A = B.Advantages[I];
    std::size_t K = 0;
    for (const StepRecord &S : B.Episodes[I].Steps) {
      if (S.Forced)
        continue;
      double Rho = P.forward(S.Features)[toInt(S.Act)] / OldProbs[I][K++];
      bool Active = A >= 0 ? Rho < 1.0 + Eps : Rho > 1.0 - Eps;
      // d(rho A)/d theta = A rho d log pi / d theta.
      if (Active && A != 0.0)
        P.accumulateLogProbGrad(S.Features, S.Act,
                                A * Rho / static_cast<double>(N), Parts[I]);
    }
    addEntropy(P, B.Episodes[I], EntropyScale, Parts[I]);
  });
  return detail::sumInOrder(Parts, P.paramCount());
}

} // namespace

ParamVector inlinesim::policyGradientEstimate(
    const MlpPolicy &P, std::span<const EpisodeResult> Episodes,
    std::span<const double> Advantages, double EntropyBonus, unsigned Workers) {
  const std::size_t N = Episodes.size();
  if (Advantages.size() != N)
    throw Error(ErrorKind::Params, "one advantage per episode is required");
  std::size_t DecisionSteps = 0;
  for (const EpisodeResult &E : Episodes)
    for (const StepRecord &S : E.Steps)
      DecisionSteps += !S.Forced;
  const double EntropyScale =
      DecisionSteps ? EntropyBonus / static_cast<double>(DecisionSteps) : 0.0;
  std::vector<ParamVector> Parts(N);
  parallelFor(N, Workers, [&](std::size_t I) {
    Parts[I].assign(P.paramCount(), 0.0);
    const double Scale = Advantages[I] / static_cast<double>(N);
    for (const StepRecord &S : Episodes[I].Steps)
      if (!S.Forced && Scale != 0.0)
        P.accumulateLogProbGrad(S.Features, S.Act, Scale, Parts[I]);
    addEntropy(P, Episodes[I], EntropyScale, Parts[I]);
  });
  return detail::sumInOrder(Parts, P.paramCount());
}

TrainResult inlinesim::trainPg(std::span<const ModuleGraph> Corpus,
                               const MlpPolicy &Warmstart,
                               const TrainerConfig &Cfg, const TrainHooks &Hooks) {
  checkConfig(Cfg);
  if (Corpus.empty())
    throw Error(ErrorKind::Data, "policy gradient needs a non-empty corpus");
  detail::Stopwatch Clock;
  const Rng Stream = Rng(Cfg.Seed).split(detail::PgStream);
  // The baseline does not depend on the policy, so it is computed once.
  const auto Baseline =
      runHeuristicEpisodes(Corpus, Cfg.Heuristic, Cfg.Cap, Cfg.Workers);

  MlpPolicy Policy = Warmstart;
  GradientAscent Opt(Cfg.Optimizer, Cfg.LearningRate, Policy.paramCount());
  TrainReport Report;
  std::int64_t Consumed = 0;
  const auto N = static_cast<std::size_t>(Cfg.EpisodesPerIteration);

  for (std::int64_t It = 1; It <= Cfg.Iterations; ++It) {
    const Rng Iter = Stream.split(static_cast<std::uint64_t>(It));
    Rng Pick = Iter.split(0);
    std::vector<std::size_t> Modules(N);
    for (std::size_t &M : Modules)
      M = static_cast<std::size_t>(
          Pick.uniformInt(0, static_cast<std::int64_t>(Corpus.size()) - 1));

    Batch B;
    B.Episodes.resize(N);
    parallelFor(N, Cfg.Workers, [&](std::size_t I) {
      Rng Sampler = Iter.split(1 + I);
      B.Episodes[I] = runPolicyEpisode(Corpus[Modules[I]], Policy,
                                       ActMode::Sample, &Sampler, Cfg.Cap);
    });
    double SumReward = 0, SumAdvantage = 0;
    for (std::size_t I = 0; I < N; ++I) {
      const EpisodeResult &E = B.Episodes[I];
      double Adv = static_cast<double>(E.TotalReward -
                                       Baseline[Modules[I]].TotalReward) /
                   static_cast<double>(std::max<std::int64_t>(1, E.InitialSize));
      B.Advantages.push_back(Adv);
      SumReward += static_cast<double>(E.TotalReward);
      SumAdvantage += Adv;
      for (const StepRecord &S : E.Steps)
        B.DecisionSteps += !S.Forced;
    }
    Consumed += static_cast<std::int64_t>(N);
    if (Hooks.OnEpisodes)
      Hooks.OnEpisodes(It, B.Episodes);

    if (!Cfg.PpoClip) {
      Policy = detail::applyUpdate(
          Policy, Opt,
          policyGradientEstimate(Policy, B.Episodes, B.Advantages,
                                 Cfg.EntropyBonus, Cfg.Workers));
    } else {
      std::vector<std::vector<double>> OldProbs(N);
      for (std::size_t I = 0; I < N; ++I)
        for (const StepRecord &S : B.Episodes[I].Steps)
          if (!S.Forced)
            OldProbs[I].push_back(Policy.forward(S.Features)[toInt(S.Act)]);
      for (std::int64_t Epoch = 0; Epoch < Cfg.EpochsPerBatch; ++Epoch)
        Policy = detail::applyUpdate(Policy, Opt,
                                     clippedGradient(Policy, B, OldProbs, Cfg));
    }

    IterationRecord Rec;
    Rec.Iteration = It;
    Rec.Episodes = Consumed;
    Rec.MeanReward = SumReward / static_cast<double>(N);
    Rec.MeanAdvantage = SumAdvantage / static_cast<double>(N);
    if (detail::shouldEvaluate(It, Cfg))
      Rec.EvalReductionPct = evaluatePolicy(Corpus, &Policy, Baseline,
                                            Cfg.Heuristic, Cfg.Cap, Cfg.Workers)
                                 .AggregateReductionPct;
    Rec.WallSeconds = Clock.seconds();
    Report.Iterations.push_back(Rec);
    if (Hooks.OnIteration)
      Hooks.OnIteration(It, Policy);
  }
  return {std::move(Policy), std::move(Report)};
}
