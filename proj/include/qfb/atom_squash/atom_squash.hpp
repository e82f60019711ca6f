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

namespace qfb::atom {

// Two-level atom inside a Markovian homodyne feedback loop. eta_mm is the
// mode matching of the loop beam onto the atom, eps the detector efficiency
// and g the round-loop gain (g < 1). Time is in units of the inverse
// longitudinal decay rate.
struct AtomLoopParams {
  double eta_mm = 1.0;
  double eps = 1.0;
  double g = 0.0;

  void validate() const;
  // lambda = g eta / (1 - g), in (-eta, inf)
  double lambda() const;
  static AtomLoopParams from_lambda(double eta_mm, double eps, double lambda);
};

struct BlochRates {
  double gamma_x;
  double gamma_y;
  double gamma_z;
  double c;
};

struct BlochVector {
  double sx;
  double sy;
  double sz;
};

// D[sigma] - i lambda [sigma_y / 2, sigma rho + rho sigma^dagger]
//   + (lambda^2 / eta eps) D[sigma_y / 2]
core::LindbladModel atom_feedback_master_equation(const AtomLoopParams& p);

// S = 1 + 2 lambda / eta + lambda^2 / (eta^2 eps)
double in_loop_spectrum(const AtomLoopParams& p);

// gamma_x = (1 + 2 lambda + lambda^2 / eta eps) / 2, gamma_y = 1/2,
// gamma_z = gamma_x + gamma_y, C = 1 + lambda.
BlochRates decay_rates(const AtomLoopParams& p);

BlochVector steady_state_bloch(const AtomLoopParams& p);

// P(w) = (1 - eta)(gamma_z - C) / (8 pi gamma_z)
//        * [gamma_x / (gamma_x^2 + w^2) + gamma_y / (gamma_y^2 + w^2)].
// Throws NegativePrefactor when gamma_z < C.
Spectrum fluorescence_spectrum(const BlochRates& rates, double eta_mm, const std::vector<double>& omega_grid);
Spectrum fluorescence_spectrum(const AtomLoopParams& p, const std::vector<double>& omega_grid);

// Atom with a fraction eta_mm of its field modes in minimum-uncertainty
// squeezed vacuum with X spectrum L.
struct FreeSqueezeParams {
  double eta_mm = 1.0;
  double squeeze_l = 1.0;

  void validate() const;
};

struct FreeSqueezeModel {
  core::LindbladModel model;
  BlochRates rates;
};

// (1 - eta) D[sigma] + (eta / 4L) D[(L + 1) sigma - (L - 1) sigma^dagger];
// gamma_x = ((1 - eta) + eta L) / 2, gamma_y = ((1 - eta) + eta / L) / 2, C = 1.
FreeSqueezeModel free_squeezing_model(const FreeSqueezeParams& p);

struct Comparison {
  double lambda;
  BlochRates in_loop;
  BlochRates free;
  Spectrum p_in_loop;
  Spectrum p_free;
};

// In-loop and free atoms seeing the same X spectrum S at the atom. The
// in-loop gain is lambda = eta eps (-1 + sqrt(1 - (1 - S) / eps)); throws
// UnreachableSqueezing when S < 1 - eps.
Comparison compare_inloop_free(double eta_mm, double s_target, double eps, const std::vector<double>& omega_grid);

}  // namespace qfb::atom
