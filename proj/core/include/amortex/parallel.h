// Copyright 2026 The Amortex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal fork-join helpers. With one worker everything runs inline on the
// calling thread, which keeps single-threaded runs bit-reproducible.

#ifndef AMORTEX_PARALLEL_H_
#define AMORTEX_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace amortex {

// Calls fn(i) for every i in [0, n) on up to `workers` threads. Indices are
// handed out dynamically; callers must write results to disjoint slots. The
// first exception thrown by any call is rethrown after all threads join.
void ParallelFor(size_t n, int workers, const std::function<void(size_t)>& fn);

}  // namespace amortex

#endif  // AMORTEX_PARALLEL_H_
