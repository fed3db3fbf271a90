//===- Ratio.h - Exact non-negative rationals -------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Growth caps are compared against integer instruction counts, so they are
// kept as exact fractions rather than doubles.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_RATIO_H
#define INLINESIM_RATIO_H

#include <cstdint>
#include <string>
#include <string_view>

namespace inlinesim {

class Ratio {
public:
  constexpr Ratio() = default;
  /// Reduced on construction; Den must be positive.
  Ratio(std::int64_t Num, std::int64_t Den);

  std::int64_t num() const { return Num; }
  std::int64_t den() const { return Den; }

  /// True iff Value > this * Scale, evaluated exactly.
  bool exceededBy(std::int64_t Value, std::int64_t Scale) const;
  /// floor(this * Scale).
  std::int64_t floorTimes(std::int64_t Scale) const;
  double toDouble() const { return static_cast<double>(Num) / Den; }

  /// Accepts "3/2", "1.5" or "2". Throws Error(Parse) otherwise.
  static Ratio parse(std::string_view Text);
  /// Canonical form: "3/2", or "2" when the denominator is one.
  std::string str() const;

  friend bool operator==(const Ratio &, const Ratio &) = default;

private:
  std::int64_t Num = 1;
  std::int64_t Den = 1;
};

} // namespace inlinesim

#endif // INLINESIM_RATIO_H
