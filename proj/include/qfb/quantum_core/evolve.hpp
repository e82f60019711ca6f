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

#include <vector>

#include "qfb/quantum_core/lindblad.hpp"

namespace qfb::core {

inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kTruncationThreshold = 1e-6;

struct EvolveDiagnostics {
  std::size_t steps = 0;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  // Largest population seen in the top two basis levels (monitored models only).
  double top_level_population = 0.0;
  bool truncation_warning = false;
};

// Fixed-step RK4 on the matrix form. The state is symmetrized after every
// step. Throws PositivityViolation if the final state has an eigenvalue below
// -kTolPositivity.
DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t,
                     double dt = kDefaultDt, EvolveDiagnostics* diag = nullptr);

// States at each (ascending, non-negative) time in `times`.
std::vector<DensityMatrix> evolve_series(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<double>& times, double dt = kDefaultDt,
                                         EvolveDiagnostics* diag = nullptr);

// Unique stationary state from the null space of the vectorized generator.
// Throws DegenerateSteadyState unless the kernel is one-dimensional.
DensityMatrix steady_state(const LindbladModel& model);

// Tr[left e^{L tau} X] on an ascending tau grid starting at or after zero,
// by RK4 stepping of the vectorized generator.
std::vector<Complex> two_time_correlation(const LindbladModel& model, const Operator& left,
                                          const Matrix& initial_deviation,
                                          const std::vector<double>& tau_grid, double dt = kDefaultDt);

// Exact one-step RK4 map for a linear generator S and step h:
// sum_{k<=4} (hS)^k / k!.
Matrix rk4_propagator(const Matrix& generator, double h);

}  // namespace qfb::core
