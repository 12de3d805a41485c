// Copyright 2026 The mi-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIAUDIT_PARALLEL_H_
#define MIAUDIT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace miaudit {

// Runs body(i) for i in [0, n) on up to `max_threads` threads (0 = hardware
// concurrency). Tasks must write only to slots they own, so results do not
// depend on scheduling. The exception of the lowest failing index is
// rethrown after all tasks finish.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body,
                 std::size_t max_threads = 0);

}  // namespace miaudit

#endif  // MIAUDIT_PARALLEL_H_
