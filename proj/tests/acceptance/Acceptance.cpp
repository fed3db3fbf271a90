//===- Acceptance.cpp - End-to-end acceptance checks ----------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Prints one PASS/FAIL line per criterion and exits non-zero if any fails.
//
//   1  reward conservation on 1000 modules x 6 deciders
//   2  log-probability gradient vs central differences
//   3  ES estimator: linear exactness and quadratic convergence
//   4  behavioral cloning: held-out agreement >= 0.90
//   5  policy gradient from the BC warmstart: >= +1.0% on corpus A
//   6  the same policy on the disjoint corpus B: > 0%
//   7  episodes to +0.5%: PG <= ES under a matched budget
//   8  oracle soundness and gap on 50 small modules, M1 16 vs 17
//   9  criteria 4-6 are byte-identical with 1 and 8 workers
//
//===----------------------------------------------------------------------===//

#include "Fixtures.h"
#include "GradCheck.h"

#include "inlinesim/CorpusGen.h"
#include "inlinesim/Error.h"
#include "inlinesim/Oracle.h"
#include "inlinesim/Trainers.h"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

using namespace inlinesim;
using namespace inlinesim::test;

namespace {

constexpr std::uint64_t SeedA = 1;
constexpr std::uint64_t SeedB = 2;
constexpr std::int64_t EpisodeBudget = 3200;

struct Verdict {
  bool Pass;
  std::string Detail;
};

std::vector<ModuleGraph> buildCorpus(const CorpusParams &P) {
  std::vector<ModuleGraph> Out;
  for (const ModuleDesc &D : generateCorpus(P))
    Out.push_back(ModuleGraph::build(D));
  return Out;
}

CorpusParams corpusA() {
  CorpusParams P;
  P.Seed = SeedA;
  return P;
}

CorpusParams corpusB() {
  CorpusParams P;
  P.Seed = SeedB;
  P.ModuleCount = 100;
  return P;
}

TrainerConfig bcConfig(unsigned Workers) {
  TrainerConfig C;
  C.Algo = Algorithm::Bc;
  C.Iterations = 500;
  C.LearningRate = 0.01;
  C.EvalEvery = 0;
  C.Workers = Workers;
  return C;
}

TrainerConfig pgConfig(unsigned Workers) {
  TrainerConfig C;
  C.Algo = Algorithm::Pg;
  C.Iterations = 300;
  C.LearningRate = 3e-3;
  C.EpisodesPerIteration = 32;
  C.EvalEvery = 10;
  C.Workers = Workers;
  return C;
}

/// Everything criteria 4-6 produce, in serialized form.
struct Pipeline {
  std::optional<TrainResult> Bc, Pg;
  EvaluationReport OnA, OnB;

  std::string bytes() const {
    if (!Bc || !Pg)
      return "";
    return serializePolicy(Bc->Policy) + metricsCsv(Bc->Report, false) +
           serializePolicy(Pg->Policy) + metricsCsv(Pg->Report, false) +
           evaluationTable(OnA) + evaluationTable(OnB);
  }
};

Pipeline runPipeline(std::span<const ModuleGraph> A, std::span<const ModuleGraph> B,
                     unsigned Workers) {
  Pipeline P;
  P.Bc = trainBc(A, bcConfig(Workers));
  TrainerConfig Pg = pgConfig(Workers);
  P.Pg = trainPg(A, P.Bc->Policy, Pg);
  P.OnA = evaluatePolicy(A, &P.Pg->Policy, Pg.Heuristic, Pg.Cap, Workers);
  P.OnB = evaluatePolicy(B, &P.Pg->Policy, Pg.Heuristic, Pg.Cap, Workers);
  return P;
}

//===----------------------------------------------------------------------===//
// 1-3: properties
//===----------------------------------------------------------------------===//

Verdict conservation() {
  std::size_t Episodes = 0, Bad = 0;
  std::string First;
  for (std::uint64_t Seed = 0; Seed < 1000; ++Seed) {
    ModuleDesc D = randomModule(Seed);
    ModuleGraph M = ModuleGraph::build(D);
    const Ratio Cap = M.growthCap();
    Rng R = Rng(Seed).split(0xacc);
    std::vector<EpisodeResult> Runs;
    Runs.push_back(runEpisode(M, heuristicDecider(HeuristicParams{}), Cap));
    Runs.push_back(runEpisode(M, constantDecider(Action::DontInline), Cap));
    Runs.push_back(runEpisode(M, constantDecider(Action::Inline), Cap));
    for (int K = 0; K < 3; ++K) {
      MlpPolicy P = randomPolicy(R);
      Runs.push_back(runPolicyEpisode(M, P, ActMode::Sample, &R, Cap));
    }
    for (const EpisodeResult &E : Runs) {
      ++Episodes;
      std::int64_t StepSum = 0;
      for (const StepRecord &S : E.Steps)
        StepSum += S.Reward;
      bool Ok = E.InitialSize == descSize(D) &&
                E.TotalReward == E.InitialSize - E.FinalSize &&
                E.TotalReward == StepSum && !checkEpisode(E);
      if (!Ok && Bad++ == 0)
        First = fmt::format("module seed {}: reward {} initial {} final {}", Seed,
                            E.TotalReward, E.InitialSize, E.FinalSize);
    }
  }
  return {Bad == 0, Bad == 0 ? fmt::format("{} episodes conserve size", Episodes)
                             : fmt::format("{} of {} episodes violate; {}", Bad,
                                           Episodes, First)};
}

Verdict gradientCheck() {
  Rng R(2024);
  double Worst = 0;
  for (int I = 0; I < 100; ++I) {
    MlpPolicy P = randomPolicy(R);
    FeatureVector F = randomFeatures(R);
    Action A = R.uniform01() < 0.5 ? Action::Inline : Action::DontInline;
    ParamVector G = P.logProbGrad(F, A).second;
    Worst = std::max(Worst, maxGradientError(P, G, [&](const MlpPolicy &Q) {
                       return logProb(Q, F, A);
                     }));
  }
  return {Worst <= 1e-4, fmt::format("max relative error {:.3e} (limit 1e-4)", Worst)};
}

Verdict esEstimator() {
  std::vector<ParamVector> Unit{{1.0}};
  ParamVector T{0.75};
  ParamVector G = esGradient(
      T, [](std::span<const double> X) { return X[0]; }, 1.0, Unit, false, 1);
  const double LinearErr = std::abs(G[0] - 1.0);

  const ParamVector Target{1.0, -2.0, 0.5, 3.0, -0.25};
  auto F = [&](std::span<const double> X) {
    double S = 0;
    for (std::size_t J = 0; J < X.size(); ++J)
      S += (X[J] - Target[J]) * (X[J] - Target[J]);
    return -S;
  };
  ParamVector Theta(Target.size(), 0.0);
  GradientAscent Opt(OptimizerKind::Sgd, 0.05, Theta.size());
  Rng R(3);
  int Iter = 0;
  while (std::sqrt(-F(Theta)) > 1e-2 && Iter < 2000) {
    auto Dirs = drawAntitheticNoise(R, Theta.size(), 20);
    Opt.step(Theta, esGradient(Theta, F, 0.1, Dirs, true, 1));
    ++Iter;
  }
  const double Dist = std::sqrt(-F(Theta));
  bool Pass = LinearErr <= 4 * std::numeric_limits<double>::epsilon() && Dist <= 1e-2;
  return {Pass, fmt::format("linear error {:.1e}; quadratic distance {:.2e} after "
                            "{} iterations",
                            LinearErr, Dist, Iter)};
}

//===----------------------------------------------------------------------===//
// 4-7: training
//===----------------------------------------------------------------------===//

std::optional<std::int64_t> episodesToReach(const TrainReport &R, double Pct) {
  for (const IterationRecord &I : R.Iterations)
    if (I.EvalReductionPct && *I.EvalReductionPct >= Pct)
      return I.Episodes;
  return std::nullopt;
}

Verdict sampleEfficiency(std::span<const ModuleGraph> A, const MlpPolicy &Start) {
  TrainerConfig Pg = pgConfig(1);
  Pg.Iterations = EpisodeBudget / Pg.EpisodesPerIteration;
  Pg.EvalEvery = 1;
  TrainResult P = trainPg(A, Start, Pg);

  TrainerConfig Es;
  Es.Algo = Algorithm::Es;
  Es.EvalEvery = 1;
  Es.Iterations = EpisodeBudget / (Es.EsPopulation * Es.EsBatchModules);
  TrainResult E = trainEs(A, Start, Es);

  auto PgN = episodesToReach(P.Report, 0.5);
  auto EsN = episodesToReach(E.Report, 0.5);
  auto Show = [](std::optional<std::int64_t> N) {
    return N ? std::to_string(*N) : fmt::format("not within {}", EpisodeBudget);
  };
  std::string Ratio = "undefined";
  if (PgN && EsN)
    Ratio = fmt::format("{:.2f}", static_cast<double>(*EsN) / *PgN);
  else if (PgN)
    Ratio = fmt::format("> {:.2f}", static_cast<double>(EpisodeBudget) / *PgN);
  bool Pass = PgN && (!EsN || *PgN <= *EsN);
  return {Pass, fmt::format("episodes to +0.5%: PG {}, ES {}; ES/PG ratio {}",
                            Show(PgN), Show(EsN), Ratio)};
}

//===----------------------------------------------------------------------===//
// 8: oracle
//===----------------------------------------------------------------------===//

Verdict oracleGap(const MlpPolicy &Bc, const MlpPolicy &Pg) {
  CorpusParams P;
  P.Seed = 8;
  P.ModuleCount = 1;
  P.FunctionsPerModule = {3, 7};
  P.CallSitesPerFunction = {0, 3};
  std::size_t Modules = 0, Unsound = 0, PolicyNoWorse = 0;
  std::uint64_t Nodes = 0;
  std::int64_t Optimal = 0, Heuristic = 0, Policy = 0;
  Rng R(88);
  for (std::int64_t Index = 0; Modules < 50 && Index < 10000; ++Index) {
    ModuleGraph M = ModuleGraph::build(generateModule(P, Index));
    const Ratio Cap = M.growthCap();
    EpisodeResult H = runEpisode(M, heuristicDecider(HeuristicParams{}), Cap);
    if (H.Steps.empty())
      continue;
    OracleResult O;
    try {
      O = bruteForceOptimal(M, DefaultOracleMaxDecisions, Cap);
    } catch (const Error &E) {
      if (E.kind() != ErrorKind::DepthExceeded)
        throw;
      continue;
    }
    ++Modules;
    Nodes += O.NodesExplored;
    std::vector<std::int64_t> Finals{
        H.FinalSize,
        runEpisode(M, constantDecider(Action::DontInline), Cap).FinalSize,
        runEpisode(M, constantDecider(Action::Inline), Cap).FinalSize,
        runPolicyEpisode(M, Bc, ActMode::Argmax, nullptr, Cap).FinalSize,
        runPolicyEpisode(M, Bc, ActMode::Sample, &R, Cap).FinalSize,
        runPolicyEpisode(M, Pg, ActMode::Sample, &R, Cap).FinalSize};
    const std::int64_t PgFinal =
        runPolicyEpisode(M, Pg, ActMode::Argmax, nullptr, Cap).FinalSize;
    Finals.push_back(PgFinal);
    for (std::int64_t F : Finals)
      Unsound += O.OptimalFinalSize > F;
    PolicyNoWorse += PgFinal <= H.FinalSize;
    Optimal += O.OptimalFinalSize;
    Heuristic += H.FinalSize;
    Policy += PgFinal;
  }

  ModuleGraph M1 = m1();
  const std::int64_t M1Opt = bruteForceOptimal(M1, 14, M1.growthCap()).OptimalFinalSize;
  const std::int64_t M1Heur =
      runEpisode(M1, heuristicDecider(HeuristicParams{}), M1.growthCap()).FinalSize;

  const double Share = Modules ? static_cast<double>(PolicyNoWorse) / Modules : 0;
  bool Pass = Modules == 50 && Unsound == 0 && Share >= 0.6 && M1Opt == 16 &&
              M1Heur == 17;
  return {Pass,
          fmt::format("{} modules, {} unsound comparisons, policy <= heuristic on "
                      "{:.0f}% (limit 60%); totals optimal {} policy {} heuristic "
                      "{}; {} search nodes; M1 optimal {} heuristic {}",
                      Modules, Unsound, 100 * Share, Optimal, Policy, Heuristic,
                      Nodes, M1Opt, M1Heur)};
}

struct Runner {
  int Failures = 0;

  void report(int Id, const std::function<Verdict()> &Check) {
    auto Start = std::chrono::steady_clock::now();
    Verdict V;
    try {
      V = Check();
    } catch (const std::exception &E) {
      V = {false, fmt::format("exception: {}", E.what())};
    }
    double Secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - Start).count();
    Failures += !V.Pass;
    fmt::print("{} criterion {}: {} [{:.1f}s]\n", V.Pass ? "PASS" : "FAIL", Id,
               V.Detail, Secs);
    std::fflush(stdout);
  }
};

} // namespace

int main() {
  Runner Run;
  Run.report(1, conservation);
  Run.report(2, gradientCheck);
  Run.report(3, esEstimator);

  const auto A = buildCorpus(corpusA());
  const auto B = buildCorpus(corpusB());
  std::optional<Pipeline> One;
  Run.report(4, [&]() -> Verdict {
    One.emplace();
    One->Bc = trainBc(A, bcConfig(1));
    double Held = One->Bc->Report.HeldOutAgreement.value_or(0);
    return {Held >= 0.90,
            fmt::format("held-out agreement {:.4f} (limit 0.90), train {:.4f}, "
                        "{} iterations",
                        Held, One->Bc->Report.TrainAgreement.value_or(0),
                        One->Bc->Report.BcLoss.size())};
  });
  Run.report(5, [&]() -> Verdict {
    if (!One || !One->Bc)
      return {false, "criterion 4 did not run"};
    TrainerConfig Pg = pgConfig(1);
    One->Pg = trainPg(A, One->Bc->Policy, Pg);
    One->OnA = evaluatePolicy(A, &One->Pg->Policy, Pg.Heuristic, Pg.Cap, 1);
    return {One->OnA.AggregateReductionPct >= 1.0,
            fmt::format("reduction {:+.3f}% on corpus A (limit +1.0%), {} "
                        "iterations, wins {} losses {} ties {}",
                        One->OnA.AggregateReductionPct,
                        One->Pg->Report.Iterations.size(), One->OnA.Wins,
                        One->OnA.Losses, One->OnA.Ties)};
  });
  Run.report(6, [&]() -> Verdict {
    if (!One || !One->Bc)
      return {false, "criterion 4 did not run"};
    TrainerConfig Pg = pgConfig(1);
    One->OnB = evaluatePolicy(B, &One->Pg->Policy, Pg.Heuristic, Pg.Cap, 1);
    return {One->OnB.AggregateReductionPct > 0,
            fmt::format("reduction {:+.3f}% on corpus B (limit > 0), wins {} "
                        "losses {} ties {}",
                        One->OnB.AggregateReductionPct, One->OnB.Wins,
                        One->OnB.Losses, One->OnB.Ties)};
  });
  Run.report(7, [&]() -> Verdict {
    if (!One || !One->Bc)
      return {false, "criterion 4 did not run"};
    return sampleEfficiency(A, One->Bc->Policy);
  });
  Run.report(8, [&]() -> Verdict {
    if (!One || !One->Bc)
      return {false, "criterion 4 did not run"};
    return oracleGap(One->Bc->Policy, One->Pg->Policy);
  });
  Run.report(9, [&]() -> Verdict {
    if (!One || !One->Bc)
      return {false, "criterion 4 did not run"};
    Pipeline Eight = runPipeline(A, B, 8);
    const std::string Ref = One->bytes();
    const std::string Got = Eight.bytes();
    bool Same = Ref == Got;
    return {Same, fmt::format("{} bytes of policies, metrics and evaluations "
                              "{} with 1 and 8 workers",
                              Ref.size(), Same ? "identical" : "differ")};
  });
  fmt::print("{} of 9 criteria failed\n", Run.Failures);
  return Run.Failures == 0 ? 0 : 1;
}
