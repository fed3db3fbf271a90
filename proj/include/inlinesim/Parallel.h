//===- Parallel.h - Deterministic fan-out over a worker pool ----*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef INLINESIM_PARALLEL_H
#define INLINESIM_PARALLEL_H

#include <cstddef>
#include <functional>

namespace inlinesim {

/// Runs Body(I) for I in [0, Count) on up to \p Workers threads. Callers write
/// results into slot I, so the outcome never depends on scheduling. The first
/// exception thrown by any task is rethrown after all workers join.
void parallelFor(std::size_t Count, unsigned Workers,
                 const std::function<void(std::size_t)> &Body);

} // namespace inlinesim

#endif // INLINESIM_PARALLEL_H
