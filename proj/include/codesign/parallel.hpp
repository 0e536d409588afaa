// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CODESIGN_PARALLEL_HPP_
#define CODESIGN_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace codesign {

// Worker count: CODESIGN_THREADS if set, else hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
// only to slot i so the result does not depend on scheduling. The first
// exception thrown by any index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace codesign

#endif  // CODESIGN_PARALLEL_HPP_
