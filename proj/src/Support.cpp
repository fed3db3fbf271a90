//===- Support.cpp - Errors, rationals, RNG and worker pool ---------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "inlinesim/Error.h"
#include "inlinesim/Parallel.h"
#include "inlinesim/Ratio.h"
#include "inlinesim/Rng.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>
#include <vector>

namespace inlinesim {

std::string_view errorKindName(ErrorKind Kind) {
  switch (Kind) {
  case ErrorKind::Usage:
    return "usage";
  case ErrorKind::InvalidCallSite:
    return "invalid-callsite";
  case ErrorKind::RecursionRefused:
    return "recursion-refused";
  case ErrorKind::UnknownFunction:
    return "unknown-function";
  case ErrorKind::Parse:
    return "parse";
  case ErrorKind::Params:
    return "params";
  case ErrorKind::Load:
    return "load";
  case ErrorKind::Data:
    return "data";
  case ErrorKind::DepthExceeded:
    return "depth-exceeded";
  case ErrorKind::Numeric:
    return "numeric";
  }
  return "unknown";
}

int exitCodeFor(ErrorKind Kind) {
  switch (Kind) {
  case ErrorKind::Usage:
  case ErrorKind::Params:
    return 1;
  case ErrorKind::Numeric:
    return 3;
  default:
    return 2;
  }
}

//===----------------------------------------------------------------------===//
// Ratio
//===----------------------------------------------------------------------===//

Ratio::Ratio(std::int64_t N, std::int64_t D) {
  if (D <= 0 || N < 0)
    throw Error(ErrorKind::Params, "ratio must be non-negative with a "
                                   "positive denominator");
  std::int64_t G = std::gcd(N, D);
  if (G == 0)
    G = 1;
  Num = N / G;
  Den = D / G;
}

bool Ratio::exceededBy(std::int64_t Value, std::int64_t Scale) const {
  return static_cast<__int128>(Value) * Den >
         static_cast<__int128>(Num) * Scale;
}

std::int64_t Ratio::floorTimes(std::int64_t Scale) const {
  return static_cast<std::int64_t>(static_cast<__int128>(Num) * Scale / Den);
}

static std::int64_t parseDigits(std::string_view Text, std::string_view Whole) {
  std::int64_t V = 0;
  auto [Ptr, Ec] = std::from_chars(Text.data(), Text.data() + Text.size(), V);
  if (Text.empty() || Ec != std::errc() || Ptr != Text.data() + Text.size() ||
      Text.front() == '-' || Text.front() == '+')
    throw Error(ErrorKind::Parse, "malformed ratio '" + std::string(Whole) + "'");
  return V;
}

Ratio Ratio::parse(std::string_view Text) {
  if (auto Slash = Text.find('/'); Slash != std::string_view::npos)
    return Ratio(parseDigits(Text.substr(0, Slash), Text),
                 parseDigits(Text.substr(Slash + 1), Text));
  if (auto Dot = Text.find('.'); Dot != std::string_view::npos) {
    std::string_view Frac = Text.substr(Dot + 1);
    if (Frac.size() > 12)
      throw Error(ErrorKind::Parse, "too many decimals in '" +
                                        std::string(Text) + "'");
    std::int64_t Scale = 1;
    for (std::size_t I = 0; I < Frac.size(); ++I)
      Scale *= 10;
    std::int64_t IntPart = Dot == 0 ? 0 : parseDigits(Text.substr(0, Dot), Text);
    std::int64_t FracPart = Frac.empty() ? 0 : parseDigits(Frac, Text);
    return Ratio(IntPart * Scale + FracPart, Scale);
  }
  return Ratio(parseDigits(Text, Text), 1);
}

std::string Ratio::str() const {
  if (Den == 1)
    return std::to_string(Num);
  return std::to_string(Num) + "/" + std::to_string(Den);
}

//===----------------------------------------------------------------------===//
// Rng
//===----------------------------------------------------------------------===//

std::int64_t Rng::uniformInt(std::int64_t Lo, std::int64_t Hi) {
  auto Range = static_cast<std::uint64_t>(Hi - Lo) + 1;
  if (Range == 0)
    return static_cast<std::int64_t>(nextU64());
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 M = static_cast<unsigned __int128>(nextU64()) * Range;
  auto Low = static_cast<std::uint64_t>(M);
  if (Low < Range) {
    std::uint64_t Threshold = -Range % Range;
    while (Low < Threshold) {
      M = static_cast<unsigned __int128>(nextU64()) * Range;
      Low = static_cast<std::uint64_t>(M);
    }
  }
  return Lo + static_cast<std::int64_t>(M >> 64);
}

double Rng::normal() {
  double U1 = 1.0 - uniform01(); // (0, 1]
  double U2 = uniform01();
  return std::sqrt(-2.0 * std::log(U1)) *
         std::cos(2.0 * std::numbers::pi * U2);
}

//===----------------------------------------------------------------------===//
// parallelFor
//===----------------------------------------------------------------------===//

void parallelFor(std::size_t Count, unsigned Workers,
                 const std::function<void(std::size_t)> &Body) {
  if (Workers <= 1 || Count <= 1) {
    for (std::size_t I = 0; I < Count; ++I)
      Body(I);
    return;
  }
  std::atomic<std::size_t> Next{0};
  std::exception_ptr Failure;
  std::mutex FailureLock;
  auto Run = [&] {
    for (;;) {
      std::size_t I = Next.fetch_add(1);
      if (I >= Count)
        return;
      try {
        Body(I);
      } catch (...) {
        std::lock_guard<std::mutex> Guard(FailureLock);
        if (!Failure)
          Failure = std::current_exception();
        Next.store(Count);
      }
    }
  };
  std::vector<std::thread> Pool;
  unsigned N = static_cast<unsigned>(std::min<std::size_t>(Workers, Count));
  Pool.reserve(N);
  for (unsigned T = 0; T < N; ++T)
    Pool.emplace_back(Run);
  for (auto &T : Pool)
    T.join();
  if (Failure)
    std::rethrow_exception(Failure);
}

} // namespace inlinesim
