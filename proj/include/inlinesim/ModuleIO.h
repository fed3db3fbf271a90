//===- ModuleIO.h - Text format for modules ---------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// One module per document, one "key value" pair per line:
//
//   format_version 1
//   module M1
//   growth_cap_factor 3/2
//   function f_helper
//     linkage internal
//     size 6
//     basic_block_count 2
//     conditional_block_count 1
//     param_count 2
//     param_savings 2 1
//     call_site c3 callee=f_leaf const_args=-
//   end_function
//
// const_args is a 0/1 string, "-" when empty. The parser only accepts the
// canonical layout the printer produces, so printing a parsed document
// reproduces it byte for byte.
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_MODULEIO_H
#define INLINESIM_MODULEIO_H

#include "inlinesim/ModuleGraph.h"

#include <filesystem>
#include <string>
#include <string_view>

namespace inlinesim {

inline constexpr int ModuleFormatVersion = 1;

std::string printModule(const ModuleDesc &M);
/// Throws Error(Parse) naming the offending line.
ModuleDesc parseModule(std::string_view Text);

/// Parses and validates; invariant violations raise Error(Load).
ModuleDesc readModuleFile(const std::filesystem::path &Path);

/// Writes \p Contents to a temporary sibling and renames it over \p Path.
void writeFileAtomic(const std::filesystem::path &Path, std::string_view Contents);
std::string readFile(const std::filesystem::path &Path);

} // namespace inlinesim

#endif // INLINESIM_MODULEIO_H
