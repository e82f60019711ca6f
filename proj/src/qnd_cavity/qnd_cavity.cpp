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

#include "qfb/qnd_cavity/qnd_cavity.hpp"

#include <cmath>
#include <string>

#include "qfb/common/parallel.hpp"
#include "qfb/errors.hpp"
#include "qfb/loop_spectra/spectra.hpp"

namespace qfb::qnd {

void QndParams::validate() const {
  for (double v : {kappa, gamma, chi})
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("QND rates kappa, gamma, chi must be positive");
}

double QndParams::q_factor() const { return 4.0 * chi / std::sqrt(gamma * kappa); }

Complex cavity_response(const QndParams& p, double omega) {
  const Complex i(0.0, 1.0);
  return p.gamma * p.kappa / ((p.kappa + 2.0 * i * omega) * (p.gamma + 2.0 * i * omega));
}

QuadratureTransfer quadrature_transfer(const QndParams& p, double omega) {
  p.validate();
  const Complex i(0.0, 1.0);
  const double k = p.kappa, g = p.gamma, q = p.q_factor();
  const Complex kp = k + 2.0 * i * omega, km = k - 2.0 * i * omega;
  const Complex gp = g + 2.0 * i * omega, gm = g - 2.0 * i * omega;
  QuadratureTransfer t;
  t.x_block << -km / kp, 0.0,                        //
      -g * k * q / (kp * gp), -gm / gp;
  t.y_block << -km / kp, q * g * k / (gp * kp),      //
      0.0, -gm / gp;
  return t;
}

loop::LoopFilter effective_loop(const QndFeedbackParams& p) {
  p.qnd.validate();
  std::vector<double> poles = p.filter.plant_poles();
  poles.push_back(p.qnd.kappa / 2.0);
  poles.push_back(p.qnd.gamma / 2.0);
  return loop::LoopFilter(p.filter.gain(), p.filter.response(), p.filter.delay(), std::move(poles));
}

double output_x_at(const QndFeedbackParams& p, double omega) {
  const double g = p.filter.gain(), q = p.qnd.q_factor();
  const Complex l = loop::loop_transfer(effective_loop(p), omega);
  const double den = std::norm(1.0 - l);
  if (std::sqrt(den) < loop::kMarginalTol) throw MarginalStability("QND loop at the critical point");
  return (p.s_in_x(omega) + g * g / (q * q)) / den;
}

double output_y_at(const QndFeedbackParams& p, double omega) {
  return p.s_in_y(omega) + std::norm(p.qnd.q_factor() * cavity_response(p.qnd, omega));
}

QndOutputSpectra qnd_feedback_output_spectra(const QndFeedbackParams& p, const std::vector<double>& grid) {
  const auto loop_filter = effective_loop(p);
  if (!loop::is_stable(loop_filter)) throw UnstableLoop("QND feedback loop is unstable");
  QndOutputSpectra s;
  s.x.omega = s.y.omega = grid;
  s.x.value = parallel_map(grid, [&](double w) { return output_x_at(p, w); });
  s.y.value = parallel_map(grid, [&](double w) { return output_y_at(p, w); });
  return s;
}

}  // namespace qfb::qnd
