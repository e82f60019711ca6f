// Copyright 2026 The qfeedback Authors
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

#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace qfb {

// Pointwise map over a grid. Each output slot is written by exactly one
// iteration, so the result does not depend on the thread count. An exception
// thrown at any point is rethrown after the loop; the lowest index wins.
template <class T, class F>
auto parallel_map(const std::vector<T>& grid, F&& f) {
  using R = decltype(f(grid.front()));
  std::vector<R> out(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = f(grid[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template <class T, class F>
auto serial_map(const std::vector<T>& grid, F&& f) {
  using R = decltype(f(grid.front()));
  std::vector<R> out;
  out.reserve(grid.size());
  for (const auto& x : grid) out.push_back(f(x));
  return out;
}

inline int max_threads() { return omp_get_max_threads(); }
inline void set_threads(int n) { omp_set_num_threads(n); }

}  // namespace qfb
