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

#include "qfb/atom_squash/atom_squash.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfb/errors.hpp"

namespace qfb::atom {

using core::Collapse;
using core::Complex;
using core::Operator;

void AtomLoopParams::validate() const {
  if (!(eta_mm >= 0.0 && eta_mm <= 1.0)) throw ValidationError("eta_mm must lie in [0, 1]");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("eps must lie in (0, 1]");
  if (!(g < 1.0) || !std::isfinite(g)) throw ValidationError("round-loop gain g must be finite and < 1");
  if (eta_mm == 0.0 && g != 0.0) throw ValidationError("feedback needs eta_mm > 0");
}

double AtomLoopParams::lambda() const { return g * eta_mm / (1.0 - g); }

AtomLoopParams AtomLoopParams::from_lambda(double eta_mm, double eps, double lambda) {
  if (!(lambda > -eta_mm) || !std::isfinite(lambda))
    throw ValidationError("lambda must exceed -eta_mm, got " + std::to_string(lambda));
  AtomLoopParams p{eta_mm, eps, eta_mm == 0.0 ? 0.0 : lambda / (eta_mm + lambda)};
  p.validate();
  return p;
}

namespace {

double noise_weight(const AtomLoopParams& p) {
  const double lam = p.lambda();
  return lam == 0.0 ? 0.0 : lam * lam / (p.eta_mm * p.eps);
}

}  // namespace

core::LindbladModel atom_feedback_master_equation(const AtomLoopParams& p) {
  p.validate();
  const double lam = p.lambda();
  const Operator s = core::sigma_minus();
  const Operator f = 0.5 * lam * core::sigma_y();
  // D[c] - i[F, c rho + rho c^dagger] + (1/e) D[F]
  //   = -i[(c^dagger F + F c)/2, rho] + D[c - iF] + (1/e - 1) D[F], e = eta eps.
  const Operator h = 0.5 * (s.adjoint() * f + f * s);
  std::vector<Collapse> c{{1.0, s + Complex(0.0, -1.0) * f}};
  if (lam != 0.0) c.push_back({1.0 / (p.eta_mm * p.eps) - 1.0, f});
  return core::LindbladModel(h, std::move(c));
}

double in_loop_spectrum(const AtomLoopParams& p) {
  p.validate();
  const double lam = p.lambda();
  if (lam == 0.0) return 1.0;
  return 1.0 + 2.0 * lam / p.eta_mm + lam * lam / (p.eta_mm * p.eta_mm * p.eps);
}

BlochRates decay_rates(const AtomLoopParams& p) {
  p.validate();
  const double lam = p.lambda();
  BlochRates r;
  r.gamma_x = 0.5 * (1.0 + 2.0 * lam + noise_weight(p));
  r.gamma_y = 0.5;
  r.gamma_z = r.gamma_x + r.gamma_y;
  r.c = 1.0 + lam;
  return r;
}

BlochVector steady_state_bloch(const AtomLoopParams& p) {
  p.validate();
  const double lam = p.lambda();
  if (lam == 0.0) return {0.0, 0.0, -1.0};
  const double den = 2.0 * p.eta_mm * p.eps * (1.0 + lam) + lam * lam;
  if (!(den > 0.0)) throw NumericalError("steady-state denominator is not positive");
  return {0.0, 0.0, -1.0 + lam * lam / den};
}

Spectrum fluorescence_spectrum(const BlochRates& r, double eta_mm, const std::vector<double>& grid) {
  if (!(eta_mm >= 0.0 && eta_mm <= 1.0)) throw ValidationError("eta_mm must lie in [0, 1]");
  // gamma_z = C (no feedback, unsqueezed vacuum) gives P = 0 identically.
  if (r.gamma_z - r.c < 0.0)
    throw NegativePrefactor("gamma_z - C = " + std::to_string(r.gamma_z - r.c) + " is negative");
  const double pre = (1.0 - eta_mm) * (r.gamma_z - r.c) / (8.0 * std::numbers::pi * r.gamma_z);
  Spectrum s;
  s.omega = grid;
  s.value.reserve(grid.size());
  for (double w : grid)
    s.value.push_back(pre * (r.gamma_x / (r.gamma_x * r.gamma_x + w * w) + r.gamma_y / (r.gamma_y * r.gamma_y + w * w)));
  return s;
}

Spectrum fluorescence_spectrum(const AtomLoopParams& p, const std::vector<double>& grid) {
  return fluorescence_spectrum(decay_rates(p), p.eta_mm, grid);
}

void FreeSqueezeParams::validate() const {
  if (!(eta_mm >= 0.0 && eta_mm <= 1.0)) throw ValidationError("eta_mm must lie in [0, 1]");
  if (!(squeeze_l > 0.0) || !std::isfinite(squeeze_l)) throw ValidationError("squeezing parameter L must be > 0");
}

FreeSqueezeModel free_squeezing_model(const FreeSqueezeParams& p) {
  p.validate();
  const double l = p.squeeze_l, eta = p.eta_mm;
  const Operator s = core::sigma_minus();
  std::vector<Collapse> c{{1.0 - eta, s}, {eta / (4.0 * l), (l + 1.0) * s + (1.0 - l) * s.adjoint()}};
  BlochRates r;
  r.gamma_x = 0.5 * ((1.0 - eta) + eta * l);
  r.gamma_y = 0.5 * ((1.0 - eta) + eta / l);
  r.gamma_z = r.gamma_x + r.gamma_y;
  r.c = 1.0;
  return {core::LindbladModel(Operator(core::Matrix::Zero(2, 2)), std::move(c)), r};
}

Comparison compare_inloop_free(double eta_mm, double s_target, double eps, const std::vector<double>& grid) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("eps must lie in (0, 1]");
  if (!(eta_mm > 0.0 && eta_mm <= 1.0)) throw ValidationError("eta_mm must lie in (0, 1]");
  if (!(s_target > 0.0)) throw ValidationError("target squeezing S must be positive");
  // Rounding slack so that S = 1 - eps itself is reachable.
  const double disc = 1.0 - (1.0 - s_target) / eps;
  if (disc < -1e-12)
    throw UnreachableSqueezing("S = " + std::to_string(s_target) + " is below the in-loop limit 1 - eps = " +
                               std::to_string(1.0 - eps));
  Comparison out;
  out.lambda = eta_mm * eps * (-1.0 + std::sqrt(std::max(0.0, disc)));
  const auto loop = AtomLoopParams::from_lambda(eta_mm, eps, out.lambda);
  out.in_loop = decay_rates(loop);
  out.free = free_squeezing_model({eta_mm, s_target}).rates;
  out.p_in_loop = fluorescence_spectrum(out.in_loop, eta_mm, grid);
  out.p_free = fluorescence_spectrum(out.free, eta_mm, grid);
  return out;
}

}  // namespace qfb::atom
