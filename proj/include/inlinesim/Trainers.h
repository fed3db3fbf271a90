//===- Trainers.h - Behavioral cloning, policy gradient, ES -----*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Three ways to fit an MlpPolicy to a module corpus:
//
//  * Behavioral cloning: supervised imitation of the heuristic's decisions,
//    used as a warmstart.
//  * Policy gradient: REINFORCE on whole-episode reward, with the heuristic's
//    reward on the same module as baseline and an optional clipped surrogate.
//  * Evolution strategies: antithetic Gaussian perturbations of the
//    parameters scored by deterministic episodes; only scalar returns are
//    consumed.
//
// Every stochastic choice draws from a stream keyed by (seed, iteration,
// task index), and per-task results are merged in index order, so results
// do not depend on the worker count.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_TRAINERS_H
#define INLINESIM_TRAINERS_H

#include "inlinesim/Environment.h"
#include "inlinesim/Error.h"
#include "inlinesim/Policy.h"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace inlinesim {

enum class Algorithm { Bc, Pg, Es };

struct TrainerConfig {
  Algorithm Algo = Algorithm::Pg;
  std::int64_t Iterations = 100;
  /// Episodes sampled per policy-gradient iteration.
  std::int64_t EpisodesPerIteration = 32;
  double LearningRate = 3e-3;
  double EsSigma = 0.1;
  /// Perturbations per ES iteration; must be even (antithetic pairs).
  std::int64_t EsPopulation = 20;
  /// Modules each ES perturbation is scored on.
  std::int64_t EsBatchModules = 16;
  /// Subtract the population mean from ES fitness values.
  bool EsCentering = true;
  double EntropyBonus = 0.01;
  /// Enables the clipped surrogate objective when set.
  std::optional<double> PpoClip;
  std::int64_t EpochsPerBatch = 3;
  std::uint64_t Seed = 0;
  unsigned Workers = 1;
  Ratio Cap{3, 2};
  HeuristicParams Heuristic;
  OptimizerKind Optimizer = OptimizerKind::Adam;
  std::vector<std::size_t> HiddenLayers{40, 20};
  /// Behavioral cloning: fraction of modules held out for agreement.
  double HoldoutFraction = 0.2;
  /// Evaluate every N iterations (the last iteration is always evaluated);
  /// 0 evaluates only the last.
  std::int64_t EvalEvery = 1;
};

/// Throws Error(Params) on an invalid configuration.
void checkConfig(const TrainerConfig &Cfg);

struct IterationRecord {
  std::int64_t Iteration = 0;
  /// Cumulative episodes consumed by training (evaluation excluded).
  std::int64_t Episodes = 0;
  double MeanReward = 0;
  double MeanAdvantage = 0;
  /// Unset when the iteration was not evaluated.
  std::optional<double> EvalReductionPct;
  double WallSeconds = 0;
};

struct TrainReport {
  std::vector<IterationRecord> Iterations;
  /// Behavioral cloning only: mean cross-entropy on the training split
  /// before each update, and step-level agreement with the heuristic.
  std::vector<double> BcLoss;
  std::optional<double> TrainAgreement;
  std::optional<double> HeldOutAgreement;
};

struct TrainResult {
  MlpPolicy Policy;
  TrainReport Report;
};

/// Raised when training produces a non-finite value; carries the last
/// finite policy.
class NumericFailure : public Error {
public:
  NumericFailure(const std::string &Message, MlpPolicy LastGood)
      : Error(ErrorKind::Numeric, Message), LastGood(std::move(LastGood)) {}
  const MlpPolicy LastGood;
};

struct TrainHooks {
  /// Called after every iteration with the updated policy.
  std::function<void(std::int64_t, const MlpPolicy &)> OnIteration;
  /// Policy gradient only: the sampled episodes of each iteration.
  std::function<void(std::int64_t, std::span<const EpisodeResult>)> OnEpisodes;
};

/// Heuristic episodes for every module, in corpus order.
std::vector<EpisodeResult> runHeuristicEpisodes(std::span<const ModuleGraph> Corpus,
                                                const HeuristicParams &P,
                                                Ratio Cap, unsigned Workers);

/// Normalization statistics over every step of \p Episodes.
FeatureStats trajectoryStats(std::span<const EpisodeResult> Episodes);

/// Freshly initialized policy with statistics from heuristic runs on
/// \p Corpus.
MlpPolicy initialPolicy(std::span<const ModuleGraph> Corpus,
                        const TrainerConfig &Cfg);

TrainResult trainBc(std::span<const ModuleGraph> Corpus, const TrainerConfig &Cfg,
                    const TrainHooks &Hooks = {});
TrainResult trainPg(std::span<const ModuleGraph> Corpus, const MlpPolicy &Warmstart,
                    const TrainerConfig &Cfg, const TrainHooks &Hooks = {});
TrainResult trainEs(std::span<const ModuleGraph> Corpus, const MlpPolicy &Init,
                    const TrainerConfig &Cfg, const TrainHooks &Hooks = {});

/// REINFORCE estimate (1/n) sum_i A_i sum_t grad log pi(a_t | s_t) over the
/// non-forced steps of \p Episodes, plus EntropyBonus times the gradient of
/// the mean policy entropy over those steps.
ParamVector policyGradientEstimate(const MlpPolicy &Policy,
                                   std::span<const EpisodeResult> Episodes,
                                   std::span<const double> Advantages,
                                   double EntropyBonus, unsigned Workers);

//===----------------------------------------------------------------------===//
// Evolution-strategies estimator
//===----------------------------------------------------------------------===//

using Objective = std::function<double(std::span<const double>)>;

/// Population/2 standard normal directions; the population is each
/// direction followed by its negation.
std::vector<ParamVector> drawAntitheticNoise(Rng &R, std::size_t Dim,
                                             std::size_t Population);

/// 1/(n sigma) * sum_i F~(theta + sigma eps_i) eps_i over the antithetic
/// population built from \p Directions, where F~ is F, or F minus its
/// population mean when \p Centering is set. \p Objective must be safe to
/// call concurrently.
ParamVector esGradient(std::span<const double> Theta, const Objective &F,
                       double Sigma, std::span<const ParamVector> Directions,
                       bool Centering, unsigned Workers);

/// Same estimator applied to precomputed fitness values, laid out as
/// (F(+eps_0), F(-eps_0), F(+eps_1), ...).
ParamVector esGradientFromFitness(std::span<const double> Fitness,
                                  double Sigma,
                                  std::span<const ParamVector> Directions,
                                  bool Centering);

//===----------------------------------------------------------------------===//
// Evaluation
//===----------------------------------------------------------------------===//

struct ModuleEvaluation {
  std::string ModuleId;
  std::int64_t InitialSize = 0;
  std::int64_t HeuristicFinalSize = 0;
  std::int64_t PolicyFinalSize = 0;
  double ReductionPct = 0;
};

struct EvaluationReport {
  std::vector<ModuleEvaluation> Modules;
  std::int64_t HeuristicTotal = 0;
  std::int64_t PolicyTotal = 0;
  /// 100 * (heuristic total - policy total) / heuristic total.
  double AggregateReductionPct = 0;
  std::int64_t Wins = 0, Losses = 0, Ties = 0;
};

/// Argmax episodes of \p Policy (or of the heuristic when null) against the
/// heuristic on every module.
EvaluationReport evaluatePolicy(std::span<const ModuleGraph> Corpus,
                                const MlpPolicy *Policy,
                                const HeuristicParams &P, Ratio Cap,
                                unsigned Workers);
/// Same, reusing precomputed heuristic episodes (one per module).
EvaluationReport evaluatePolicy(std::span<const ModuleGraph> Corpus,
                                const MlpPolicy *Policy,
                                std::span<const EpisodeResult> Heuristic,
                                const HeuristicParams &P, Ratio Cap,
                                unsigned Workers);

/// Builds the decider used on module \p Index. Deciders must be usable from
/// the calling worker only; the factory itself is called concurrently.
using DeciderFactory = std::function<Decider(std::size_t Index)>;

EvaluationReport evaluateWith(std::span<const ModuleGraph> Corpus,
                              const DeciderFactory &Make,
                              std::span<const EpisodeResult> Heuristic,
                              Ratio Cap, unsigned Workers);

/// Deterministic episode of \p Policy; \p R is required in sample mode.
EpisodeResult runPolicyEpisode(const ModuleGraph &M, const MlpPolicy &Policy,
                               ActMode Mode, Rng *R, Ratio Cap);

std::string evaluationTable(const EvaluationReport &R);

/// iteration,episodes,mean_reward,mean_advantage,eval_reduction_pct,wall_seconds
std::string metricsCsv(const TrainReport &R, bool IncludeWallTime = true);

} // namespace inlinesim

#endif // INLINESIM_TRAINERS_H
