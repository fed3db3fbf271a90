//===- Error.h - Error kinds shared across the simulator --------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_ERROR_H
#define INLINESIM_ERROR_H

#include <stdexcept>
#include <string>
#include <string_view>

namespace inlinesim {

enum class ErrorKind {
  Usage,
  InvalidCallSite,
  RecursionRefused,
  UnknownFunction,
  Parse,
  Params,
  Load,
  Data,
  DepthExceeded,
  Numeric,
};

std::string_view errorKindName(ErrorKind Kind);

/// Every failure raised by the library carries a kind so the command line
/// can map it onto a stable exit code.
class Error : public std::runtime_error {
public:
  Error(ErrorKind Kind, const std::string &Message)
      : std::runtime_error(Message), Kind(Kind) {}

  ErrorKind kind() const { return Kind; }

private:
  ErrorKind Kind;
};

/// Exit code convention: 1 usage or bad parameters, 3 numeric failure, 2
/// anything data related.
int exitCodeFor(ErrorKind Kind);

} // namespace inlinesim

#endif // INLINESIM_ERROR_H
