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

#include "qfb/common/spectrum.hpp"
#include "qfb/quantum_core/lindblad.hpp"

namespace qfb::traj {

// Markovian homodyne-feedback master equation in Lindblad form:
// H' = H + (c^dagger F + F c) / 2, principal collapse c - iF (rate 1),
// ((1 - eta) / eta) D[F], other collapses unchanged. c is the first collapse
// of `model` scaled by the square root of its rate.
core::LindbladModel feedback_master_equation(const core::LindbladModel& model, const core::Operator& f, double eta);

struct CorrelationOptions {
  // Correlations are integrated to `decay_lengths` times the slowest decay
  // time of the generator.
  double decay_lengths = 30.0;
  double dtau = 1e-2;
  std::size_t max_points = 200000;
};

// In-loop photocurrent spectrum 1 + 2 int_0^inf cos(w tau) G(tau) dtau with
// G(tau) = eta Tr{x e^{L tau} [(c - iF/eta) rho + rho (c^dagger + iF/eta) - <x> rho]},
// x = c + c^dagger, rho the steady state of `model_fb`. The shot-noise
// delta function contributes the constant 1.
Spectrum in_loop_correlation_spectrum(const core::LindbladModel& model_fb, const core::Operator& c,
                                      const core::Operator& f, double eta, const std::vector<double>& omega,
                                      const CorrelationOptions& options = {});

// The same transform with the customary normally ordered correlation,
// i.e. without the F insertions. Incorrect inside a feedback loop.
Spectrum naive_in_loop_correlation_spectrum(const core::LindbladModel& model_fb, const core::Operator& c,
                                            double eta, const std::vector<double>& omega,
                                            const CorrelationOptions& options = {});

}  // namespace qfb::traj
