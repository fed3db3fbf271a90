//===- Evaluate.cpp - Episodes, evaluation and reporting ------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TrainerSupport.h"
#include "inlinesim/Parallel.h"

#include <fmt/format.h>

using namespace inlinesim;

void inlinesim::checkConfig(const TrainerConfig &Cfg) {
  auto Fail = [](const std::string &Msg) { throw Error(ErrorKind::Params, Msg); };
  if (Cfg.Iterations < 0)
    Fail("iterations must be non-negative");
  if (!(Cfg.LearningRate > 0))
    Fail("learning rate must be positive");
  if (!(Cfg.EsSigma > 0))
    Fail("ES sigma must be positive");
  if (Cfg.EpisodesPerIteration < 1)
    Fail("episodes per iteration must be at least 1");
  if (Cfg.EsPopulation < 2 || Cfg.EsPopulation % 2 != 0)
    Fail("ES population must be a positive even number");
  if (Cfg.EsBatchModules < 1)
    Fail("ES batch must hold at least one module");
  if (!(Cfg.EntropyBonus >= 0))
    Fail("entropy bonus must be non-negative");
  if (Cfg.PpoClip && !(*Cfg.PpoClip > 0 && *Cfg.PpoClip < 1))
    Fail("PPO clip must be in (0, 1)");
  if (Cfg.EpochsPerBatch < 1)
    Fail("epochs per batch must be at least 1");
  if (Cfg.Workers < 1)
    Fail("worker count must be at least 1");
  if (!(Cfg.Cap.num() > Cfg.Cap.den()))
    Fail("growth cap must exceed 1");
  if (Cfg.Heuristic.BaseThreshold < 0 || Cfg.Heuristic.SingleBlockBonus < 0)
    Fail("heuristic threshold and bonus must be non-negative");
  if (!(Cfg.HoldoutFraction >= 0 && Cfg.HoldoutFraction < 1))
    Fail("holdout fraction must be in [0, 1)");
  if (Cfg.EvalEvery < 0)
    Fail("eval interval must be non-negative");
  for (std::size_t W : Cfg.HiddenLayers)
    if (W == 0)
      Fail("hidden layers must have positive width");
}

std::vector<EpisodeResult>
inlinesim::runHeuristicEpisodes(std::span<const ModuleGraph> Corpus,
                                const HeuristicParams &P, Ratio Cap,
                                unsigned Workers) {
  std::vector<EpisodeResult> Out(Corpus.size());
  Decider D = heuristicDecider(P);
  parallelFor(Corpus.size(), Workers,
              [&](std::size_t I) { Out[I] = runEpisode(Corpus[I], D, Cap); });
  return Out;
}

FeatureStats inlinesim::trajectoryStats(std::span<const EpisodeResult> Episodes) {
  std::vector<FeatureVector> Samples;
  for (const EpisodeResult &E : Episodes)
    for (const StepRecord &S : E.Steps)
      Samples.push_back(S.Features);
  return computeStats(Samples);
}

MlpPolicy inlinesim::initialPolicy(std::span<const ModuleGraph> Corpus,
                                   const TrainerConfig &Cfg) {
  checkConfig(Cfg);
  auto Episodes =
      runHeuristicEpisodes(Corpus, Cfg.Heuristic, Cfg.Cap, Cfg.Workers);
  Rng Init = Rng(Cfg.Seed).split(detail::InitStream);
  return MlpPolicy::initialize(detail::policyDims(Cfg), trajectoryStats(Episodes),
                               Init);
}

EpisodeResult inlinesim::runPolicyEpisode(const ModuleGraph &M,
                                          const MlpPolicy &Policy, ActMode Mode,
                                          Rng *R, Ratio Cap) {
  return runEpisode(
      M, [&](const FeatureVector &F) { return Policy.act(F, Mode, R); }, Cap);
}

EvaluationReport inlinesim::evaluatePolicy(std::span<const ModuleGraph> Corpus,
                                           const MlpPolicy *Policy,
                                           const HeuristicParams &P, Ratio Cap,
                                           unsigned Workers) {
  auto Heuristic = runHeuristicEpisodes(Corpus, P, Cap, Workers);
  return evaluatePolicy(Corpus, Policy, Heuristic, P, Cap, Workers);
}

EvaluationReport
inlinesim::evaluatePolicy(std::span<const ModuleGraph> Corpus,
                          const MlpPolicy *Policy,
                          std::span<const EpisodeResult> Heuristic,
                          const HeuristicParams &P, Ratio Cap,
                          unsigned Workers) {
  return evaluateWith(
      Corpus,
      [&](std::size_t) -> Decider {
        if (!Policy)
          return heuristicDecider(P);
        return [Policy](const FeatureVector &F) {
          return Policy->act(F, ActMode::Argmax, nullptr);
        };
      },
      Heuristic, Cap, Workers);
}

EvaluationReport inlinesim::evaluateWith(std::span<const ModuleGraph> Corpus,
                                         const DeciderFactory &Make,
                                         std::span<const EpisodeResult> Heuristic,
                                         Ratio Cap, unsigned Workers) {
  if (Heuristic.size() != Corpus.size())
    throw Error(ErrorKind::Data, "heuristic episodes do not match the corpus");
  std::vector<std::int64_t> Finals(Corpus.size());
  parallelFor(Corpus.size(), Workers, [&](std::size_t I) {
    Finals[I] = runEpisode(Corpus[I], Make(I), Cap).FinalSize;
  });

  EvaluationReport R;
  for (std::size_t I = 0; I < Corpus.size(); ++I) {
    ModuleEvaluation E;
    E.ModuleId = Corpus[I].name();
    E.InitialSize = Heuristic[I].InitialSize;
    E.HeuristicFinalSize = Heuristic[I].FinalSize;
    E.PolicyFinalSize = Finals[I];
    E.ReductionPct = E.HeuristicFinalSize == 0
                         ? 0.0
                         : 100.0 *
                               static_cast<double>(E.HeuristicFinalSize -
                                                   E.PolicyFinalSize) /
                               static_cast<double>(E.HeuristicFinalSize);
    R.HeuristicTotal += E.HeuristicFinalSize;
    R.PolicyTotal += E.PolicyFinalSize;
    if (E.PolicyFinalSize < E.HeuristicFinalSize)
      ++R.Wins;
    else if (E.PolicyFinalSize > E.HeuristicFinalSize)
      ++R.Losses;
    else
      ++R.Ties;
    R.Modules.push_back(std::move(E));
  }
  R.AggregateReductionPct =
      R.HeuristicTotal == 0
          ? 0.0
          : 100.0 * static_cast<double>(R.HeuristicTotal - R.PolicyTotal) /
                static_cast<double>(R.HeuristicTotal);
  return R;
}

std::string inlinesim::evaluationTable(const EvaluationReport &R) {
  std::string Out = fmt::format("{:<12} {:>8} {:>10} {:>8} {:>10}\n", "module",
                                "initial", "heuristic", "policy", "reduction%");
  for (const ModuleEvaluation &E : R.Modules)
    Out += fmt::format("{:<12} {:>8} {:>10} {:>8} {:>10.3f}\n", E.ModuleId,
                       E.InitialSize, E.HeuristicFinalSize, E.PolicyFinalSize,
                       E.ReductionPct);
  Out += fmt::format("total heuristic={} policy={} wins={} losses={} ties={}\n",
                     R.HeuristicTotal, R.PolicyTotal, R.Wins, R.Losses, R.Ties);
  Out += fmt::format("aggregate_reduction_pct {:.6f}\n", R.AggregateReductionPct);
  return Out;
}

std::string inlinesim::metricsCsv(const TrainReport &R, bool IncludeWallTime) {
  std::string Out = "iteration,episodes,mean_reward,mean_advantage,"
                    "eval_reduction_pct,wall_seconds\n";
  for (const IterationRecord &I : R.Iterations) {
    Out += fmt::format("{},{},{:.17g},{:.17g},", I.Iteration, I.Episodes,
                       I.MeanReward, I.MeanAdvantage);
    if (I.EvalReductionPct)
      Out += fmt::format("{:.17g}", *I.EvalReductionPct);
    Out += fmt::format(",{:.3f}\n", IncludeWallTime ? I.WallSeconds : 0.0);
  }
  return Out;
}
