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

#include <complex>
#include <vector>

#include "qfb/quantum_core/lindblad.hpp"

namespace qfb::intracavity {

enum class Measurement { Homodyne, Qnd };

// Damped parametric cavity with extra x diffusion l and parametric drive
// theta (threshold at theta = 1). Homodyne detection has efficiency eta;
// the QND scheme has measurement strength qnd_strength (H).
struct IntracavityParams {
  double l = 0.0;
  double theta = 0.0;
  double eta = 1.0;
  Measurement mode = Measurement::Homodyne;
  double qnd_strength = 1.0;

  void validate() const;

  double k0() const { return (1.0 + theta) / 2.0; }
  double d0() const { return 1.0 + l; }
  // Normally ordered x variance without measurement: (l - theta) / (1 + theta).
  double u0() const { return (l - theta) / (1.0 + theta); }
};

// dU/dt = -2 k0 U - 2 k0 + D0 - eta U^2
double riccati_rhs_homodyne(const IntracavityParams& p, double u);
// dV/dt = -2 k0 V + D0 - H V^2
double riccati_rhs_qnd(const IntracavityParams& p, double v);

// Coefficient of the white noise in the conditioned-mean equation:
// sqrt(eta) U - lambda / sqrt(eta)  (homodyne) or sqrt(H) V - lambda / sqrt(H) (QND).
double mean_noise_coefficient(const IntracavityParams& p, double variance, double lambda);

// RK4 solution of the variance equation (U_c for homodyne, V_c for QND) on
// an ascending time grid starting at t = 0 with value `initial`.
std::vector<double> conditioned_variance_trajectory(const IntracavityParams& p, double initial,
                                                     const std::vector<double>& t_grid, double dt = 1e-3);

// Stable stationary root: U_c = (-k0 + sqrt(k0^2 + eta (D0 - 2 k0))) / eta,
// or V_c = (-k0 + sqrt(k0^2 + H D0)) / H. Throws ComplexRoot if the
// discriminant is negative.
double conditioned_variance(const IntracavityParams& p);

// Gain that removes the noise from the conditioned mean.
double optimal_lambda(const IntracavityParams& p);

// Unconditioned variance under feedback gain lambda: U_c + E[x_c^2]
// (homodyne) or V_c + E[x_c^2] (QND). Throws UnstableMean if k0 + lambda <= 0.
double unconditioned_variance(const IntracavityParams& p, double lambda);

// First-order delay correction U_lambda (1 + lambda T); requires |lambda T| < 0.5.
double unconditioned_variance_delayed(const IntracavityParams& p, double lambda, double delay);

// Best unconditioned normally ordered variance reachable with feedback at the
// given efficiency (equal to U_c); at eta = 1 it is k0 (-1 + sqrt(1 + R0)),
// R0 = (D0 - 2 k0) / k0^2.
double u_min(const IntracavityParams& p);

// Truncated-Fock Lindblad model of the cavity: collapses sqrt(1) a (first,
// the monitored channel) and l/4 on (a^dagger - a), Hamiltonian
// (i theta / 4)(a^2 - a^dagger^2).
core::LindbladModel linear_cavity_model(const IntracavityParams& p, Eigen::Index cutoff);

// F = -lambda y / 2.
core::Operator feedback_operator(double lambda, Eigen::Index cutoff);

// (N+1) D[a] + N D[a^dagger] + M (a^dagger . a^dagger - {a^dagger^2, .}/2)
// + M* (a . a - {a^2, .}/2), written as two collapses from the eigenvectors
// of the 2x2 coefficient matrix [[N+1, M*], [M, N]] on (a, a^dagger).
// Throws UnphysicalBath when |M|^2 > N(N+1).
core::LindbladModel squeezed_bath_model(double n, std::complex<double> m, const core::Operator& lowering);

}  // namespace qfb::intracavity
