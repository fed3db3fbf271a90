//===- EvolutionStrategies.cpp - Antithetic ES over policy parameters -----===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TrainerSupport.h"
#include "inlinesim/Parallel.h"

#include <numeric>

using namespace inlinesim;

std::vector<ParamVector> inlinesim::drawAntitheticNoise(Rng &R, std::size_t Dim,
                                                        std::size_t Population) {
  std::vector<ParamVector> Dirs(Population / 2, ParamVector(Dim));
  for (ParamVector &D : Dirs)
    for (double &X : D)
      X = R.normal();
  return Dirs;
}

ParamVector inlinesim::esGradientFromFitness(std::span<const double> Fitness,
                                             double Sigma,
                                             std::span<const ParamVector> Dirs,
                                             bool Centering) {
  const std::size_t N = Fitness.size();
  if (N != 2 * Dirs.size() || N == 0)
    throw Error(ErrorKind::Params, "fitness count must be twice the directions");
  double Mean = 0;
  if (Centering)
    Mean = std::accumulate(Fitness.begin(), Fitness.end(), 0.0) /
           static_cast<double>(N);
  const std::size_t Dim = Dirs.front().size();
  ParamVector G(Dim, 0.0);
  const double Scale = 1.0 / (static_cast<double>(N) * Sigma);
  for (std::size_t K = 0; K < Dirs.size(); ++K) {
    double Plus = Fitness[2 * K] - Mean;
    double Minus = Fitness[2 * K + 1] - Mean;
    for (std::size_t J = 0; J < Dim; ++J)
      G[J] += Scale * (Plus * Dirs[K][J] - Minus * Dirs[K][J]);
  }
  return G;
}

ParamVector inlinesim::esGradient(std::span<const double> Theta,
                                  const Objective &F, double Sigma,
                                  std::span<const ParamVector> Dirs,
                                  bool Centering, unsigned Workers) {
  std::vector<double> Fitness(2 * Dirs.size());
  parallelFor(Fitness.size(), Workers, [&](std::size_t I) {
    const ParamVector &D = Dirs[I / 2];
    const double Sign = I % 2 == 0 ? Sigma : -Sigma;
    ParamVector Point(Theta.begin(), Theta.end());
    for (std::size_t J = 0; J < Point.size(); ++J)
      Point[J] += Sign * D[J];
    Fitness[I] = F(Point);
  });
  return esGradientFromFitness(Fitness, Sigma, Dirs, Centering);
}

TrainResult inlinesim::trainEs(std::span<const ModuleGraph> Corpus,
                               const MlpPolicy &Init, const TrainerConfig &Cfg,
                               const TrainHooks &Hooks) {
  checkConfig(Cfg);
  if (Corpus.empty())
    throw Error(ErrorKind::Data, "evolution strategies need a non-empty corpus");
  detail::Stopwatch Clock;
  const Rng Stream = Rng(Cfg.Seed).split(detail::EsStream);
  const auto Heuristic =
      runHeuristicEpisodes(Corpus, Cfg.Heuristic, Cfg.Cap, Cfg.Workers);

  MlpPolicy Policy = Init;
  GradientAscent Opt(Cfg.Optimizer, Cfg.LearningRate, Policy.paramCount());
  TrainReport Report;
  std::int64_t Consumed = 0;
  const auto Pop = static_cast<std::size_t>(Cfg.EsPopulation);
  const auto BatchSize = static_cast<std::size_t>(Cfg.EsBatchModules);

  for (std::int64_t It = 1; It <= Cfg.Iterations; ++It) {
    const Rng Iter = Stream.split(static_cast<std::uint64_t>(It));
    Rng Pick = Iter.split(0);
    std::vector<std::size_t> Batch(BatchSize);
    for (std::size_t &M : Batch)
      M = static_cast<std::size_t>(
          Pick.uniformInt(0, static_cast<std::int64_t>(Corpus.size()) - 1));
    Rng Noise = Iter.split(1);
    auto Dirs = drawAntitheticNoise(Noise, Policy.paramCount(), Pop);

    // Fitness: mean size reduction relative to initial size, argmax episodes.
    std::vector<double> Fitness(Pop);
    std::vector<std::int64_t> RewardSum(Pop, 0);
    std::vector<double> AdvantageSum(Pop, 0.0);
    parallelFor(Pop, Cfg.Workers, [&](std::size_t I) {
      const double Sign = I % 2 == 0 ? Cfg.EsSigma : -Cfg.EsSigma;
      ParamVector Point = Policy.params();
      for (std::size_t J = 0; J < Point.size(); ++J)
        Point[J] += Sign * Dirs[I / 2][J];
      MlpPolicy Perturbed = Policy;
      Perturbed.setParams(std::move(Point));
      double Total = 0;
      for (std::size_t M : Batch) {
        EpisodeResult E = runPolicyEpisode(Corpus[M], Perturbed,
                                           ActMode::Argmax, nullptr, Cfg.Cap);
        const auto Scale =
            static_cast<double>(std::max<std::int64_t>(1, E.InitialSize));
        RewardSum[I] += E.TotalReward;
        Total += static_cast<double>(E.TotalReward) / Scale;
        AdvantageSum[I] +=
            static_cast<double>(E.TotalReward - Heuristic[M].TotalReward) / Scale;
      }
      Fitness[I] = Total / static_cast<double>(BatchSize);
    });
    Consumed += static_cast<std::int64_t>(Pop * BatchSize);

    Policy = detail::applyUpdate(
        Policy, Opt,
        esGradientFromFitness(Fitness, Cfg.EsSigma, Dirs, Cfg.EsCentering));

    IterationRecord Rec;
    Rec.Iteration = It;
    Rec.Episodes = Consumed;
    Rec.MeanReward =
        static_cast<double>(std::accumulate(RewardSum.begin(), RewardSum.end(),
                                            std::int64_t{0})) /
        static_cast<double>(Pop * BatchSize);
    Rec.MeanAdvantage =
        std::accumulate(AdvantageSum.begin(), AdvantageSum.end(), 0.0) /
        static_cast<double>(Pop * BatchSize);
    if (detail::shouldEvaluate(It, Cfg))
      Rec.EvalReductionPct = evaluatePolicy(Corpus, &Policy, Heuristic,
                                            Cfg.Heuristic, Cfg.Cap, Cfg.Workers)
                                 .AggregateReductionPct;
    Rec.WallSeconds = Clock.seconds();
    Report.Iterations.push_back(Rec);
    if (Hooks.OnIteration)
      Hooks.OnIteration(It, Policy);
  }
  return {std::move(Policy), std::move(Report)};
}
