//===- Cli.h - Command-line driver -----------------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_TOOLS_CLI_H
#define INLINESIM_TOOLS_CLI_H

#include <ostream>
#include <string>
#include <vector>

namespace inlinesim {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage, 2 data error, 3 numeric failure.
int runCli(const std::vector<std::string> &Args, std::ostream &Out,
           std::ostream &Err);

} // namespace inlinesim

#endif // INLINESIM_TOOLS_CLI_H
