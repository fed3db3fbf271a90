//===- BehavioralCloning.cpp - Imitate the heuristic ----------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Full-batch maximum likelihood of the heuristic's action at every decision
// the heuristic made on the training split. The split is by module, so
// held-out agreement measures generalization to unseen call graphs.
//
//===----------------------------------------------------------------------===//

#include "TrainerSupport.h"
#include "inlinesim/Parallel.h"

#include <numeric>

using namespace inlinesim;

namespace {

struct Sample {
  FeatureVector Features;
  Action Label;
};

// Fixed partition of the samples, so gradient sums are independent of the
// worker count.
constexpr std::size_t Chunks = 64;

double agreement(const MlpPolicy &P, std::span<const Sample> Samples) {
  if (Samples.empty())
    return 0.0;
  std::size_t Agree = 0;
  for (const Sample &S : Samples)
    Agree += P.act(S.Features, ActMode::Argmax, nullptr) == S.Label;
  return static_cast<double>(Agree) / static_cast<double>(Samples.size());
}

} // namespace

TrainResult inlinesim::trainBc(std::span<const ModuleGraph> Corpus,
                               const TrainerConfig &Cfg, const TrainHooks &Hooks) {
  checkConfig(Cfg);
  if (Corpus.empty())
    throw Error(ErrorKind::Data, "behavioral cloning needs a non-empty corpus");
  detail::Stopwatch Clock;
  const Rng Stream = Rng(Cfg.Seed).split(detail::BcStream);
  auto Heuristic =
      runHeuristicEpisodes(Corpus, Cfg.Heuristic, Cfg.Cap, Cfg.Workers);

  // Seeded module split.
  std::vector<std::size_t> Order(Corpus.size());
  std::iota(Order.begin(), Order.end(), 0);
  Rng Shuffle = Stream.split(0);
  for (std::size_t I = Order.size(); I > 1; --I)
    std::swap(Order[I - 1],
              Order[static_cast<std::size_t>(Shuffle.uniformInt(
                  0, static_cast<std::int64_t>(I) - 1))]);
  auto HoldoutCount = static_cast<std::size_t>(
      Cfg.HoldoutFraction * static_cast<double>(Corpus.size()) + 0.5);
  HoldoutCount = std::min(HoldoutCount, Corpus.size() - 1);

  std::vector<EpisodeResult> TrainEpisodes;
  std::vector<Sample> Train, HeldOut;
  for (std::size_t K = 0; K < Order.size(); ++K) {
    const EpisodeResult &E = Heuristic[Order[K]];
    bool IsHeldOut = K >= Order.size() - HoldoutCount;
    if (!IsHeldOut)
      TrainEpisodes.push_back(E);
    for (const StepRecord &S : E.Steps)
      if (!S.Forced)
        (IsHeldOut ? HeldOut : Train).push_back({S.Features, S.Act});
  }
  if (Train.empty())
    throw Error(ErrorKind::Data,
                "training split has no decision points to imitate");

  double MeanReward = 0;
  for (const EpisodeResult &E : TrainEpisodes)
    MeanReward += static_cast<double>(E.TotalReward);
  MeanReward /= static_cast<double>(TrainEpisodes.size());

  Rng Init = Rng(Cfg.Seed).split(detail::InitStream);
  MlpPolicy Policy = MlpPolicy::initialize(
      detail::policyDims(Cfg), trajectoryStats(TrainEpisodes), Init);
  GradientAscent Opt(Cfg.Optimizer, Cfg.LearningRate, Policy.paramCount());
  TrainReport Report;

  const std::size_t N = Train.size();
  const double Scale = 1.0 / static_cast<double>(N);
  for (std::int64_t It = 1; It <= Cfg.Iterations; ++It) {
    std::vector<ParamVector> Grads(Chunks);
    std::vector<double> LogLik(Chunks, 0.0);
    parallelFor(Chunks, Cfg.Workers, [&](std::size_t C) {
      Grads[C].assign(Policy.paramCount(), 0.0);
      for (std::size_t I = C * N / Chunks; I < (C + 1) * N / Chunks; ++I)
        LogLik[C] += Policy.accumulateLogProbGrad(Train[I].Features,
                                                  Train[I].Label, Scale, Grads[C]);
    });
    double Loss = -std::accumulate(LogLik.begin(), LogLik.end(), 0.0) * Scale;
    detail::requireFinite(std::span<const double>(&Loss, 1), "loss", Policy);
    Report.BcLoss.push_back(Loss);
    Policy = detail::applyUpdate(Policy, Opt,
                                 detail::sumInOrder(Grads, Policy.paramCount()));

    IterationRecord Rec;
    Rec.Iteration = It;
    Rec.Episodes = It * static_cast<std::int64_t>(TrainEpisodes.size());
    Rec.MeanReward = MeanReward;
    if (detail::shouldEvaluate(It, Cfg))
      Rec.EvalReductionPct = evaluatePolicy(Corpus, &Policy, Heuristic,
                                            Cfg.Heuristic, Cfg.Cap, Cfg.Workers)
                                 .AggregateReductionPct;
    Rec.WallSeconds = Clock.seconds();
    Report.Iterations.push_back(Rec);
    if (Hooks.OnIteration)
      Hooks.OnIteration(It, Policy);
  }

  Report.TrainAgreement = agreement(Policy, Train);
  if (!HeldOut.empty())
    Report.HeldOutAgreement = agreement(Policy, HeldOut);
  return {std::move(Policy), std::move(Report)};
}
