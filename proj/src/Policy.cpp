//===- Policy.cpp - Feed-forward inlining policy --------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Policy.h"
#include "inlinesim/Error.h"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

using namespace inlinesim;

static std::size_t countParams(const std::vector<std::size_t> &Dims) {
  std::size_t N = 0;
  for (std::size_t L = 0; L + 1 < Dims.size(); ++L)
    N += Dims[L + 1] * (Dims[L] + 1);
  return N;
}

MlpPolicy::MlpPolicy(std::vector<std::size_t> D, FeatureStats S)
    : Dims(std::move(D)), Stats(S) {
  if (Dims.size() < 2 || Dims.front() != NumFeatures || Dims.back() != 2)
    throw Error(ErrorKind::Load,
                fmt::format("policy dims must run from {} inputs to 2 outputs",
                            NumFeatures));
  if (std::find(Dims.begin(), Dims.end(), 0u) != Dims.end())
    throw Error(ErrorKind::Load, "policy layer of width 0");
  for (std::size_t I = 0; I < NumFeatures; ++I)
    if (!std::isfinite(Stats.Mean[I]) || !std::isfinite(Stats.Std[I]) ||
        Stats.Std[I] <= 0)
      throw Error(ErrorKind::Load, "policy normalization stats are invalid");
  Params.assign(countParams(Dims), 0.0);
}

MlpPolicy MlpPolicy::initialize(std::vector<std::size_t> Dims,
                                FeatureStats Stats, Rng &R) {
  MlpPolicy P(std::move(Dims), Stats);
  std::size_t Offset = 0;
  for (std::size_t L = 0; L + 1 < P.Dims.size(); ++L) {
    std::size_t In = P.Dims[L], Out = P.Dims[L + 1];
    bool Hidden = L + 2 < P.Dims.size();
    if (Hidden) {
      double Limit = std::sqrt(6.0 / static_cast<double>(In + Out));
      for (std::size_t K = 0; K < In * Out; ++K)
        P.Params[Offset + K] = (2.0 * R.uniform01() - 1.0) * Limit;
    }
    Offset += Out * (In + 1);
  }
  return P;
}

void MlpPolicy::setParams(ParamVector P) {
  if (P.size() != Params.size())
    throw Error(ErrorKind::Load,
                fmt::format("parameter vector has {} entries, expected {}",
                            P.size(), Params.size()));
  for (double V : P)
    if (!std::isfinite(V))
      throw Error(ErrorKind::Numeric, "non-finite policy parameter");
  Params = std::move(P);
}

MlpPolicy::Activations MlpPolicy::run(const FeatureVector &F) const {
  Activations A;
  A.Inputs.resize(Dims.size() - 1);
  auto &X0 = A.Inputs[0];
  X0.resize(NumFeatures);
  for (std::size_t I = 0; I < NumFeatures; ++I)
    X0[I] = (static_cast<double>(F.Values[I]) - Stats.Mean[I]) /
            std::max(Stats.Std[I], StdFloor);

  std::size_t Offset = 0;
  for (std::size_t L = 0; L + 1 < Dims.size(); ++L) {
    const std::size_t In = Dims[L], Out = Dims[L + 1];
    const double *W = Params.data() + Offset;
    const double *B = W + In * Out;
    const auto &X = A.Inputs[L];
    const bool Last = L + 2 == Dims.size();
    std::vector<double> Y(Out);
    for (std::size_t J = 0; J < Out; ++J) {
      double Z = B[J];
      const double *Row = W + J * In;
      for (std::size_t I = 0; I < In; ++I)
        Z += Row[I] * X[I];
      Y[J] = Last ? Z : std::max(Z, 0.0);
    }
    if (Last)
      A.Logits = {Y[0], Y[1]};
    else
      A.Inputs[L + 1] = std::move(Y);
    Offset += Out * (In + 1);
  }

  if (!std::isfinite(A.Logits[0]) || !std::isfinite(A.Logits[1]))
    throw Error(ErrorKind::Numeric, "policy produced a non-finite logit");
  double Max = std::max(A.Logits[0], A.Logits[1]);
  double LogSum =
      Max + std::log(std::exp(A.Logits[0] - Max) + std::exp(A.Logits[1] - Max));
  A.LogProbs = {A.Logits[0] - LogSum, A.Logits[1] - LogSum};
  return A;
}

std::array<double, 2> MlpPolicy::forward(const FeatureVector &F) const {
  Activations A = run(F);
  return {std::exp(A.LogProbs[0]), std::exp(A.LogProbs[1])};
}

Action MlpPolicy::act(const FeatureVector &F, ActMode Mode, Rng *R) const {
  auto P = forward(F);
  if (Mode == ActMode::Argmax)
    return P[1] > P[0] ? Action::Inline : Action::DontInline;
  return R->uniform01() < P[1] ? Action::Inline : Action::DontInline;
}

void MlpPolicy::backward(const Activations &Acts,
                         std::array<double, 2> LogitGrad, double Scale,
                         std::span<double> Accum) const {
  std::vector<double> Delta(LogitGrad.begin(), LogitGrad.end());
  std::size_t End = Params.size();
  for (std::size_t L = Dims.size() - 1; L-- > 0;) {
    const std::size_t In = Dims[L], Out = Dims[L + 1];
    const std::size_t Offset = End - Out * (In + 1);
    const double *W = Params.data() + Offset;
    const auto &X = Acts.Inputs[L];
    double *GW = Accum.data() + Offset;
    double *GB = GW + In * Out;
    for (std::size_t J = 0; J < Out; ++J) {
      double D = Scale * Delta[J];
      GB[J] += D;
      double *Row = GW + J * In;
      for (std::size_t I = 0; I < In; ++I)
        Row[I] += D * X[I];
    }
    if (L > 0) {
      std::vector<double> Prev(In, 0.0);
      for (std::size_t J = 0; J < Out; ++J) {
        const double *Row = W + J * In;
        for (std::size_t I = 0; I < In; ++I)
          Prev[I] += Row[I] * Delta[J];
      }
      // Rectifier derivative, zero at the kink.
      for (std::size_t I = 0; I < In; ++I)
        if (!(X[I] > 0.0))
          Prev[I] = 0.0;
      Delta = std::move(Prev);
    }
    End = Offset;
  }
}

double MlpPolicy::accumulateLogProbGrad(const FeatureVector &F, Action A,
                                        double Scale,
                                        std::span<double> Accum) const {
  Activations Acts = run(F);
  int K = toInt(A);
  std::array<double, 2> P = {std::exp(Acts.LogProbs[0]),
                             std::exp(Acts.LogProbs[1])};
  backward(Acts, {(K == 0 ? 1.0 : 0.0) - P[0], (K == 1 ? 1.0 : 0.0) - P[1]},
           Scale, Accum);
  return Acts.LogProbs[K];
}

double MlpPolicy::accumulateEntropyGrad(const FeatureVector &F, double Scale,
                                        std::span<double> Accum) const {
  Activations Acts = run(F);
  std::array<double, 2> P = {std::exp(Acts.LogProbs[0]),
                             std::exp(Acts.LogProbs[1])};
  double H = -(P[0] * Acts.LogProbs[0] + P[1] * Acts.LogProbs[1]);
  backward(Acts,
           {-P[0] * (Acts.LogProbs[0] + H), -P[1] * (Acts.LogProbs[1] + H)},
           Scale, Accum);
  return H;
}

std::pair<double, ParamVector> MlpPolicy::logProbGrad(const FeatureVector &F,
                                                      Action A) const {
  ParamVector G(Params.size(), 0.0);
  double LogP = accumulateLogProbGrad(F, A, 1.0, G);
  for (double V : G)
    if (!std::isfinite(V))
      throw Error(ErrorKind::Numeric, "non-finite policy gradient");
  return {LogP, std::move(G)};
}

//===----------------------------------------------------------------------===//
// Serialization
//===----------------------------------------------------------------------===//

static void appendDoubles(std::string &Out, std::string_view Key,
                          std::span<const double> Values) {
  Out += Key;
  for (double V : Values)
    Out += fmt::format(" {:.17g}", V);
  Out += '\n';
}

std::string inlinesim::serializePolicy(const MlpPolicy &P) {
  std::string Out = fmt::format("format_version {}\n", PolicyFormatVersion);
  Out += "dims";
  for (std::size_t D : P.dims())
    Out += fmt::format(" {}", D);
  Out += '\n';
  Out += fmt::format("stats_samples {}\n", P.stats().Samples);
  appendDoubles(Out, "stats_mean", P.stats().Mean);
  appendDoubles(Out, "stats_std", P.stats().Std);
  const auto &Dims = P.dims();
  std::span<const double> Params = P.params();
  std::size_t Offset = 0;
  for (std::size_t L = 0; L + 1 < Dims.size(); ++L) {
    std::size_t In = Dims[L], Width = Dims[L + 1];
    for (std::size_t J = 0; J < Width; ++J)
      appendDoubles(Out, fmt::format("layer {} weights {}", L, J),
                    Params.subspan(Offset + J * In, In));
    appendDoubles(Out, fmt::format("layer {} bias", L),
                  Params.subspan(Offset + In * Width, Width));
    Offset += Width * (In + 1);
  }
  Out += "end\n";
  return Out;
}

namespace {

class TokenLines {
public:
  explicit TokenLines(std::string_view Text) : Text(Text) {}

  /// Next line split on single spaces; the first token must equal \p Key.
  std::vector<std::string_view> line(std::string_view Key) {
    if (Pos >= Text.size())
      fail(fmt::format("truncated policy: expected '{}'", Key));
    auto Nl = Text.find('\n', Pos);
    if (Nl == std::string_view::npos)
      fail("truncated policy: missing newline");
    std::string_view L = Text.substr(Pos, Nl - Pos);
    Pos = Nl + 1;
    ++LineNo;
    std::vector<std::string_view> Tokens;
    std::size_t Start = 0;
    while (Start <= L.size()) {
      auto Sp = L.find(' ', Start);
      if (Sp == std::string_view::npos)
        Sp = L.size();
      Tokens.push_back(L.substr(Start, Sp - Start));
      Start = Sp + 1;
    }
    if (Tokens.front() != Key)
      fail(fmt::format("expected '{}'", Key));
    return Tokens;
  }

  bool atEnd() const { return Pos >= Text.size(); }

  template <typename T> T number(std::string_view Tok) const {
    T V{};
    auto [Ptr, Ec] = std::from_chars(Tok.data(), Tok.data() + Tok.size(), V);
    if (Tok.empty() || Ec != std::errc() || Ptr != Tok.data() + Tok.size())
      fail(fmt::format("malformed number '{}'", Tok));
    return V;
  }

  [[noreturn]] void fail(const std::string &Msg) const {
    throw Error(ErrorKind::Parse, fmt::format("line {}: {}", LineNo, Msg));
  }

private:
  std::string_view Text;
  std::size_t Pos = 0;
  unsigned LineNo = 0;
};

} // namespace

static void readDoubles(TokenLines &R, std::vector<std::string_view> Tokens,
                        std::size_t Skip, std::size_t Count, double *Out) {
  if (Tokens.size() != Skip + Count)
    R.fail(fmt::format("expected {} values", Count));
  for (std::size_t I = 0; I < Count; ++I) {
    Out[I] = R.number<double>(Tokens[Skip + I]);
    if (!std::isfinite(Out[I]))
      throw Error(ErrorKind::Load, "non-finite value in policy file");
  }
}

MlpPolicy inlinesim::deserializePolicy(std::string_view Text) {
  TokenLines R(Text);
  auto Version = R.line("format_version");
  if (Version.size() != 2)
    R.fail("malformed format_version");
  if (R.number<int>(Version[1]) != PolicyFormatVersion)
    throw Error(ErrorKind::Load, "unsupported policy format_version");

  auto DimTokens = R.line("dims");
  std::vector<std::size_t> Dims;
  for (std::size_t I = 1; I < DimTokens.size(); ++I)
    Dims.push_back(R.number<std::size_t>(DimTokens[I]));

  FeatureStats Stats;
  auto Samples = R.line("stats_samples");
  if (Samples.size() != 2)
    R.fail("malformed stats_samples");
  Stats.Samples = R.number<std::uint64_t>(Samples[1]);
  readDoubles(R, R.line("stats_mean"), 1, NumFeatures, Stats.Mean.data());
  readDoubles(R, R.line("stats_std"), 1, NumFeatures, Stats.Std.data());

  MlpPolicy P(Dims, Stats); // Validates the shape.
  ParamVector Params(P.paramCount());
  std::size_t Offset = 0;
  for (std::size_t L = 0; L + 1 < Dims.size(); ++L) {
    std::size_t In = Dims[L], Out = Dims[L + 1];
    for (std::size_t J = 0; J < Out; ++J) {
      auto Tokens = R.line("layer");
      if (Tokens.size() < 4 || Tokens[1] != std::to_string(L) ||
          Tokens[2] != "weights" || Tokens[3] != std::to_string(J))
        R.fail(fmt::format("expected 'layer {} weights {}'", L, J));
      readDoubles(R, Tokens, 4, In, Params.data() + Offset + J * In);
    }
    auto Tokens = R.line("layer");
    if (Tokens.size() < 3 || Tokens[1] != std::to_string(L) ||
        Tokens[2] != "bias")
      R.fail(fmt::format("expected 'layer {} bias'", L));
    readDoubles(R, Tokens, 3, Out, Params.data() + Offset + In * Out);
    Offset += Out * (In + 1);
  }
  if (R.line("end").size() != 1 || !R.atEnd())
    R.fail("trailing content after 'end'");
  P.setParams(std::move(Params));
  return P;
}

std::string inlinesim::describePolicy(const MlpPolicy &P) {
  std::string DimText;
  for (std::size_t D : P.dims())
    DimText += (DimText.empty() ? "" : "x") + std::to_string(D);
  // FNV-1a over the exact bit patterns of the normalization statistics.
  std::uint64_t Hash = 0xcbf29ce484222325ULL;
  auto Feed = [&Hash](std::uint64_t Word) {
    for (int B = 0; B < 8; ++B) {
      Hash ^= (Word >> (8 * B)) & 0xff;
      Hash *= 0x100000001b3ULL;
    }
  };
  Feed(P.stats().Samples);
  for (std::size_t I = 0; I < NumFeatures; ++I) {
    Feed(std::bit_cast<std::uint64_t>(P.stats().Mean[I]));
    Feed(std::bit_cast<std::uint64_t>(P.stats().Std[I]));
  }
  return fmt::format("dims {}\nparameters {}\nstats_samples {}\n"
                     "stats_digest {:016x}\n",
                     DimText, P.paramCount(), P.stats().Samples, Hash);
}

//===----------------------------------------------------------------------===//
// GradientAscent
//===----------------------------------------------------------------------===//

GradientAscent::GradientAscent(OptimizerKind Kind, double LearningRate,
                               std::size_t Size)
    : Kind(Kind), LearningRate(LearningRate) {
  if (Kind == OptimizerKind::Adam) {
    M.assign(Size, 0.0);
    V.assign(Size, 0.0);
  }
}

void GradientAscent::step(std::span<double> Params,
                          std::span<const double> Grad) {
  if (Kind == OptimizerKind::Sgd) {
    for (std::size_t I = 0; I < Params.size(); ++I)
      Params[I] += LearningRate * Grad[I];
    return;
  }
  constexpr double Beta1 = 0.9, Beta2 = 0.999, Eps = 1e-8;
  ++T;
  const double C1 = 1.0 - std::pow(Beta1, static_cast<double>(T));
  const double C2 = 1.0 - std::pow(Beta2, static_cast<double>(T));
  for (std::size_t I = 0; I < Params.size(); ++I) {
    M[I] = Beta1 * M[I] + (1.0 - Beta1) * Grad[I];
    V[I] = Beta2 * V[I] + (1.0 - Beta2) * Grad[I] * Grad[I];
    Params[I] += LearningRate * (M[I] / C1) / (std::sqrt(V[I] / C2) + Eps);
  }
}
