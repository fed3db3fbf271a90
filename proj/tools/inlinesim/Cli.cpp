//===- Cli.cpp - Command-line driver --------------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Subcommands: gen-corpus, train, evaluate, oracle, inspect-log and
// policy describe. Every flag can also be given in a TOML config file passed
// with --config (subcommand flags live under a [subcommand] table); flags on
// the command line win. Path flags may also come from INLINESIM_* variables.
//
// Failures print one JSON object on stderr, e.g.
//   {"error":"parse","message":"line 3: ..."}
//
//===----------------------------------------------------------------------===//

#include "Cli.h"

#include "inlinesim/CorpusGen.h"
#include "inlinesim/Environment.h"
#include "inlinesim/Error.h"
#include "inlinesim/ModuleIO.h"
#include "inlinesim/Oracle.h"
#include "inlinesim/Policy.h"
#include "inlinesim/Trainers.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>

using namespace inlinesim;
namespace fs = std::filesystem;

namespace {

IntRange parseRange(const std::string &Text, const char *Flag) {
  IntRange R;
  auto Colon = Text.find(':');
  try {
    std::size_t Used = 0;
    if (Colon == std::string::npos) {
      R.Lo = R.Hi = std::stoll(Text, &Used);
      if (Used != Text.size())
        throw std::invalid_argument(Text);
    } else {
      R.Lo = std::stoll(Text.substr(0, Colon), &Used);
      if (Used != Colon)
        throw std::invalid_argument(Text);
      std::string Rest = Text.substr(Colon + 1);
      R.Hi = std::stoll(Rest, &Used);
      if (Used != Rest.size())
        throw std::invalid_argument(Text);
    }
  } catch (const std::logic_error &) {
    throw Error(ErrorKind::Usage,
                fmt::format("{} expects LO:HI, got '{}'", Flag, Text));
  }
  return R;
}

Ratio parseCap(const std::string &Text) {
  try {
    return Ratio::parse(Text);
  } catch (const Error &E) {
    throw Error(ErrorKind::Usage, fmt::format("bad --growth-cap: {}", E.what()));
  }
}

std::vector<ModuleGraph> loadCorpus(const std::string &Dir) {
  if (Dir.empty())
    throw Error(ErrorKind::Usage, "--corpus is required");
  std::vector<ModuleGraph> Out;
  for (const ModuleDesc &D : readCorpusDir(Dir))
    Out.push_back(ModuleGraph::build(D));
  if (Out.empty())
    throw Error(ErrorKind::Data, "corpus '" + Dir + "' is empty");
  return Out;
}

/// The explicit flag wins; otherwise every module must declare the same cap.
Ratio resolveCap(std::span<const ModuleGraph> Corpus, const std::string &Flag) {
  if (!Flag.empty())
    return parseCap(Flag);
  Ratio Cap = Corpus.front().growthCap();
  for (const ModuleGraph &M : Corpus)
    if (M.growthCap() != Cap)
      throw Error(ErrorKind::Data,
                  "modules disagree on growth cap; pass --growth-cap");
  return Cap;
}

MlpPolicy loadPolicy(const std::string &Path) {
  return deserializePolicy(readFile(Path));
}

/// Options shared by subcommands that run episodes.
struct EpisodeOpts {
  std::string Corpus;
  std::string GrowthCap;
  unsigned Workers = 1;
  HeuristicParams Heuristic;

  void attach(CLI::App *Cmd) {
    Cmd->add_option("--corpus", Corpus, "Corpus directory")
        ->envname("INLINESIM_CORPUS");
    Cmd->add_option("--growth-cap", GrowthCap,
                    "Growth cap factor (default: the modules' own)");
    Cmd->add_option("--workers", Workers, "Worker threads")
        ->check(CLI::PositiveNumber);
    Cmd->add_option("--base-threshold", Heuristic.BaseThreshold,
                    "Heuristic cost threshold");
    Cmd->add_option("--single-block-bonus", Heuristic.SingleBlockBonus,
                    "Heuristic bonus for single-block callees");
  }
};

//===----------------------------------------------------------------------===//
// gen-corpus
//===----------------------------------------------------------------------===//

struct GenOpts {
  CorpusParams P;
  std::string Out;
  std::string Functions = "8:40", Size = "3:60", Params = "0:4",
              CallSites = "0:4", GrowthCap = "3/2";
};

void addGen(CLI::App &App, GenOpts &O) {
  CLI::App *C = App.add_subcommand("gen-corpus", "Generate a synthetic corpus");
  C->add_option("--out", O.Out, "Output directory (must not exist)")
      ->envname("INLINESIM_CORPUS_OUT");
  C->add_option("--seed", O.P.Seed, "Generator seed");
  C->add_option("--count", O.P.ModuleCount, "Number of modules");
  C->add_option("--functions", O.Functions, "Functions per module LO:HI");
  C->add_option("--size", O.Size, "Function size LO:HI");
  C->add_option("--params", O.Params, "Parameter count LO:HI");
  C->add_option("--call-sites", O.CallSites, "Call sites per function LO:HI");
  C->add_option("--const-arg-prob", O.P.ConstArgProbability);
  C->add_option("--internal-prob", O.P.InternalLinkageProbability);
  C->add_option("--back-edge-prob", O.P.BackEdgeProbability);
  C->add_option("--savings-lo", O.P.SavingsFractionLo,
                "Smallest savings fraction of a function's size");
  C->add_option("--savings-hi", O.P.SavingsFractionHi,
                "Largest savings fraction of a function's size");
  C->add_option("--growth-cap", O.GrowthCap, "Growth cap written to modules");
}

int runGen(GenOpts &O, std::ostream &Out) {
  if (O.Out.empty())
    throw Error(ErrorKind::Usage, "--out is required");
  O.P.FunctionsPerModule = parseRange(O.Functions, "--functions");
  O.P.Size = parseRange(O.Size, "--size");
  O.P.ParamCount = parseRange(O.Params, "--params");
  O.P.CallSitesPerFunction = parseRange(O.CallSites, "--call-sites");
  O.P.GrowthCap = parseCap(O.GrowthCap);
  auto Modules = generateCorpus(O.P);
  writeCorpusDir(O.Out, Modules, O.P);
  std::int64_t Total = 0;
  for (const ModuleDesc &M : Modules)
    for (const FunctionDesc &F : M.Functions)
      Total += F.Size;
  Out << fmt::format("wrote {} modules to {} (total size {})\n", Modules.size(),
                     O.Out, Total);
  return 0;
}

//===----------------------------------------------------------------------===//
// train
//===----------------------------------------------------------------------===//

struct TrainOpts {
  EpisodeOpts E;
  TrainerConfig Cfg;
  std::string Out, Warmstart, Metrics, LogDir, CheckpointDir;
  std::int64_t CheckpointEvery = 0;
  std::optional<double> PpoClip;
  std::vector<std::size_t> Hidden{40, 20};
  bool NoEsCentering = false;
  bool NoWallTime = false;
};

void addTrain(CLI::App &App, TrainOpts &O) {
  CLI::App *C = App.add_subcommand("train", "Train a policy");
  O.E.attach(C);
  const std::map<std::string, Algorithm> Algos{
      {"bc", Algorithm::Bc}, {"pg", Algorithm::Pg}, {"es", Algorithm::Es}};
  const std::map<std::string, OptimizerKind> Opts{{"adam", OptimizerKind::Adam},
                                                  {"sgd", OptimizerKind::Sgd}};
  C->add_option("--algo", O.Cfg.Algo, "bc, pg or es")
      ->required()
      ->transform(CLI::CheckedTransformer(Algos));
  C->add_option("--out", O.Out, "Output policy file")
      ->envname("INLINESIM_POLICY_OUT");
  C->add_option("--warmstart", O.Warmstart, "Initial policy for pg or es")
      ->envname("INLINESIM_WARMSTART");
  C->add_option("--metrics", O.Metrics, "Per-iteration metrics CSV")
      ->envname("INLINESIM_METRICS");
  C->add_option("--log-dir", O.LogDir, "Trajectory log directory")
      ->envname("INLINESIM_LOG_DIR");
  C->add_option("--checkpoint-dir", O.CheckpointDir, "Checkpoint directory")
      ->envname("INLINESIM_CHECKPOINT_DIR");
  C->add_option("--checkpoint-every", O.CheckpointEvery,
                "Write a checkpoint every K iterations (0: never)")
      ->check(CLI::NonNegativeNumber);
  C->add_option("--iterations", O.Cfg.Iterations);
  C->add_option("--episodes-per-iteration", O.Cfg.EpisodesPerIteration);
  C->add_option("--learning-rate", O.Cfg.LearningRate);
  C->add_option("--es-sigma", O.Cfg.EsSigma);
  C->add_option("--es-population", O.Cfg.EsPopulation);
  C->add_option("--es-batch-modules", O.Cfg.EsBatchModules);
  C->add_flag("--no-es-centering", O.NoEsCentering,
              "Use raw ES fitness instead of mean-centered fitness");
  C->add_option("--entropy-bonus", O.Cfg.EntropyBonus);
  C->add_option("--ppo-clip", O.PpoClip,
                "Enable the clipped surrogate with this epsilon");
  C->add_option("--epochs-per-batch", O.Cfg.EpochsPerBatch);
  C->add_option("--seed", O.Cfg.Seed);
  C->add_option("--optimizer", O.Cfg.Optimizer, "adam or sgd")
      ->transform(CLI::CheckedTransformer(Opts));
  C->add_option("--hidden", O.Hidden, "Hidden layer widths")->expected(0, -1);
  C->add_option("--holdout-fraction", O.Cfg.HoldoutFraction);
  C->add_option("--eval-every", O.Cfg.EvalEvery,
                "Evaluate every N iterations (0: last only)");
  C->add_flag("--no-wall-time", O.NoWallTime,
              "Write 0 in the wall_seconds metrics column");
}

std::string iterName(const char *Prefix, std::int64_t It, const char *Ext) {
  return fmt::format("{}{:06d}{}", Prefix, It, Ext);
}

int runTrain(TrainOpts &O, std::ostream &Out, std::ostream &Err) {
  if (O.Out.empty())
    throw Error(ErrorKind::Usage, "--out is required");
  TrainerConfig &Cfg = O.Cfg;
  Cfg.Workers = O.E.Workers;
  Cfg.Heuristic = O.E.Heuristic;
  Cfg.PpoClip = O.PpoClip;
  Cfg.HiddenLayers = O.Hidden;
  Cfg.EsCentering = !O.NoEsCentering;
  if (Cfg.Algo == Algorithm::Bc && !O.Warmstart.empty())
    throw Error(ErrorKind::Usage, "--warmstart does not apply to bc");
  if (O.CheckpointEvery > 0 && O.CheckpointDir.empty())
    throw Error(ErrorKind::Usage, "--checkpoint-every needs --checkpoint-dir");
  auto Corpus = loadCorpus(O.E.Corpus);
  Cfg.Cap = resolveCap(Corpus, O.E.GrowthCap);
  checkConfig(Cfg);

  std::optional<MlpPolicy> Start;
  if (!O.Warmstart.empty())
    Start = loadPolicy(O.Warmstart);
  for (const std::string &Dir : {O.LogDir, O.CheckpointDir})
    if (!Dir.empty())
      fs::create_directories(Dir);

  TrainHooks Hooks;
  Hooks.OnIteration = [&](std::int64_t It, const MlpPolicy &P) {
    if (O.CheckpointEvery > 0 && It % O.CheckpointEvery == 0)
      writeFileAtomic(fs::path(O.CheckpointDir) /
                          iterName("policy_iter", It, ".txt"),
                      serializePolicy(P));
  };
  if (!O.LogDir.empty())
    Hooks.OnEpisodes = [&](std::int64_t It, std::span<const EpisodeResult> Eps) {
      fs::path Dir(O.LogDir);
      writeFileAtomic(Dir / iterName("iter", It, ".jsonl"), writeLog(Eps));
      writeFileAtomic(Dir / iterName("iter", It, ".stats.json"),
                      logStatsJson(Eps));
    };

  TrainResult R = [&] {
    try {
      switch (Cfg.Algo) {
      case Algorithm::Bc:
        if (!O.LogDir.empty()) {
          auto Eps = runHeuristicEpisodes(Corpus, Cfg.Heuristic, Cfg.Cap,
                                          Cfg.Workers);
          writeFileAtomic(fs::path(O.LogDir) / "heuristic.jsonl", writeLog(Eps));
          writeFileAtomic(fs::path(O.LogDir) / "heuristic.stats.json",
                          logStatsJson(Eps));
        }
        return trainBc(Corpus, Cfg, Hooks);
      case Algorithm::Pg:
        if (!Start)
          Out << "notice: no --warmstart given; training from the uniform "
                 "initial policy\n";
        return trainPg(Corpus, Start ? *Start : initialPolicy(Corpus, Cfg), Cfg,
                       Hooks);
      case Algorithm::Es:
        return trainEs(Corpus, Start ? *Start : initialPolicy(Corpus, Cfg), Cfg,
                       Hooks);
      }
      throw Error(ErrorKind::Usage, "unknown algorithm");
    } catch (const NumericFailure &F) {
      fs::path LastGood = O.Out + ".lastgood";
      writeFileAtomic(LastGood, serializePolicy(F.LastGood));
      Err << "last good policy written to " << LastGood.string() << "\n";
      throw;
    }
  }();

  if (!O.Metrics.empty())
    writeFileAtomic(O.Metrics, metricsCsv(R.Report, !O.NoWallTime));
  writeFileAtomic(O.Out, serializePolicy(R.Policy));

  Out << fmt::format("trained {} iterations, {} parameters\n",
                     R.Report.Iterations.size(), R.Policy.paramCount());
  if (R.Report.TrainAgreement)
    Out << fmt::format("train_agreement {:.6f}\n", *R.Report.TrainAgreement);
  if (R.Report.HeldOutAgreement)
    Out << fmt::format("heldout_agreement {:.6f}\n", *R.Report.HeldOutAgreement);
  for (auto It = R.Report.Iterations.rbegin(); It != R.Report.Iterations.rend();
       ++It)
    if (It->EvalReductionPct) {
      Out << fmt::format("eval_reduction_pct {:.6f}\n", *It->EvalReductionPct);
      break;
    }
  return 0;
}

//===----------------------------------------------------------------------===//
// evaluate
//===----------------------------------------------------------------------===//

struct EvalOpts {
  EpisodeOpts E;
  std::string Policy, Out;
  bool Heuristic = false;
};

void addEval(CLI::App &App, EvalOpts &O) {
  CLI::App *C = App.add_subcommand("evaluate", "Compare a policy with the heuristic");
  O.E.attach(C);
  C->add_option("--policy", O.Policy, "Policy file")->envname("INLINESIM_POLICY");
  C->add_flag("--heuristic", O.Heuristic, "Print the per-module comparison");
  C->add_option("--out", O.Out, "Also write the report to this file")
      ->envname("INLINESIM_REPORT_OUT");
}

int runEval(EvalOpts &O, std::ostream &Out) {
  if (O.Policy.empty() && !O.Heuristic)
    throw Error(ErrorKind::Usage, "give --policy, --heuristic or both");
  auto Corpus = loadCorpus(O.E.Corpus);
  Ratio Cap = resolveCap(Corpus, O.E.GrowthCap);
  std::optional<MlpPolicy> P;
  if (!O.Policy.empty())
    P = loadPolicy(O.Policy);
  EvaluationReport R = evaluatePolicy(Corpus, P ? &*P : nullptr, O.E.Heuristic,
                                      Cap, O.E.Workers);
  std::string Text;
  if (O.Heuristic) {
    Text = evaluationTable(R);
  } else {
    Text = fmt::format("modules {}\nheuristic_total {}\npolicy_total {}\n"
                       "wins {} losses {} ties {}\naggregate_reduction_pct {:.6f}\n",
                       R.Modules.size(), R.HeuristicTotal, R.PolicyTotal, R.Wins,
                       R.Losses, R.Ties, R.AggregateReductionPct);
  }
  if (!O.Out.empty())
    writeFileAtomic(O.Out, Text);
  Out << Text;
  return 0;
}

//===----------------------------------------------------------------------===//
// oracle
//===----------------------------------------------------------------------===//

struct OracleOpts {
  EpisodeOpts E;
  std::string Module, Out;
  std::size_t MaxDecisions = DefaultOracleMaxDecisions;
};

void addOracle(CLI::App &App, OracleOpts &O) {
  CLI::App *C = App.add_subcommand("oracle", "Exhaustive optimum for small modules");
  O.E.attach(C);
  C->add_option("--module", O.Module, "Single module file")
      ->envname("INLINESIM_MODULE");
  C->add_option("--max-decisions", O.MaxDecisions, "Depth limit");
  C->add_option("--out", O.Out, "Also write the results to this file")
      ->envname("INLINESIM_ORACLE_OUT");
}

int runOracle(OracleOpts &O, std::ostream &Out) {
  if (O.Module.empty() == O.E.Corpus.empty())
    throw Error(ErrorKind::Usage, "give exactly one of --module and --corpus");
  std::vector<ModuleGraph> Modules;
  if (!O.Module.empty())
    Modules.push_back(ModuleGraph::build(readModuleFile(O.Module)));
  else
    Modules = loadCorpus(O.E.Corpus);
  Ratio Cap = resolveCap(Modules, O.E.GrowthCap);
  std::string Text;
  for (const ModuleGraph &M : Modules) {
    OracleResult R = bruteForceOptimal(M, O.MaxDecisions, Cap);
    EpisodeResult H = runEpisode(M, heuristicDecider(O.E.Heuristic), Cap);
    Text += oracleResultText(M.name(), R);
    Text += fmt::format("initial_size {}\nheuristic_final_size {}\n\n",
                        M.initialSize(), H.FinalSize);
  }
  if (!O.Out.empty())
    writeFileAtomic(O.Out, Text);
  Out << Text;
  return 0;
}

//===----------------------------------------------------------------------===//
// inspect-log and policy describe
//===----------------------------------------------------------------------===//

int runInspect(const std::string &Log, std::ostream &Out) {
  if (Log.empty())
    throw Error(ErrorKind::Usage, "--log is required");
  // readLog checks every episode's invariants and names the failing line.
  auto Episodes = readLog(readFile(Log));
  std::int64_t Steps = 0, Forced = 0, Inlined = 0, Reward = 0, Initial = 0;
  for (const EpisodeResult &E : Episodes) {
    Reward += E.TotalReward;
    Initial += E.InitialSize;
    for (const StepRecord &S : E.Steps) {
      ++Steps;
      Forced += S.Forced;
      Inlined += S.Act == Action::Inline;
    }
  }
  double N = std::max<double>(1, static_cast<double>(Episodes.size()));
  Out << fmt::format("episodes {}\nsteps {}\ninlined {}\nforced {}\n"
                     "total_reward {}\nmean_total_reward {:.6f}\n"
                     "mean_steps {:.6f}\ntotal_initial_size {}\n",
                     Episodes.size(), Steps, Inlined, Forced, Reward,
                     static_cast<double>(Reward) / N,
                     static_cast<double>(Steps) / N, Initial);
  return 0;
}

int runDescribe(const std::string &Path, std::ostream &Out) {
  if (Path.empty())
    throw Error(ErrorKind::Usage, "--policy is required");
  Out << describePolicy(loadPolicy(Path));
  return 0;
}

void reportError(std::ostream &Err, std::string_view Kind, std::string_view Msg) {
  nlohmann::ordered_json J;
  J["error"] = Kind;
  J["message"] = Msg;
  Err << J.dump() << "\n";
}

} // namespace

int inlinesim::runCli(const std::vector<std::string> &Args, std::ostream &Out,
                      std::ostream &Err) {
  CLI::App App("Inlining-for-size simulator and policy trainer", "inlinesim");
  App.set_config("--config", "", "TOML file with flag values");
  App.require_subcommand(1);
  App.set_help_all_flag("--help-all", "Help for every subcommand");

  GenOpts Gen;
  TrainOpts Train;
  EvalOpts Eval;
  OracleOpts Oracle;
  std::string Log, PolicyPath;
  addGen(App, Gen);
  addTrain(App, Train);
  addEval(App, Eval);
  addOracle(App, Oracle);
  CLI::App *Inspect =
      App.add_subcommand("inspect-log", "Validate and summarize a trajectory log");
  Inspect->add_option("--log", Log, "Log file")->envname("INLINESIM_LOG");
  CLI::App *PolicyCmd = App.add_subcommand("policy", "Policy file utilities");
  PolicyCmd->require_subcommand(1);
  CLI::App *Describe = PolicyCmd->add_subcommand("describe", "Summarize a policy");
  Describe->add_option("--policy", PolicyPath, "Policy file")
      ->envname("INLINESIM_POLICY");

  try {
    std::vector<std::string> Reversed(Args.rbegin(), Args.rend());
    App.parse(Reversed);
  } catch (const CLI::CallForHelp &) {
    Out << App.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    Out << App.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &E) {
    reportError(Err, "usage", E.what());
    return 1;
  }

  try {
    if (App.got_subcommand("gen-corpus"))
      return runGen(Gen, Out);
    if (App.got_subcommand("train"))
      return runTrain(Train, Out, Err);
    if (App.got_subcommand("evaluate"))
      return runEval(Eval, Out);
    if (App.got_subcommand("oracle"))
      return runOracle(Oracle, Out);
    if (App.got_subcommand("inspect-log"))
      return runInspect(Log, Out);
    return runDescribe(PolicyPath, Out);
  } catch (const Error &E) {
    reportError(Err, errorKindName(E.kind()), E.what());
    return exitCodeFor(E.kind());
  } catch (const fs::filesystem_error &E) {
    reportError(Err, "io", E.what());
    return 2;
  } catch (const std::exception &E) {
    reportError(Err, "internal", E.what());
    return 2;
  }
}
