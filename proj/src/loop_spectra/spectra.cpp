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

#include "qfb/loop_spectra/spectra.hpp"

#include <cmath>
#include <string>

#include "qfb/common/parallel.hpp"
#include "qfb/errors.hpp"

namespace qfb::loop {

namespace {

double denominator(const LoopFilter& f, double omega) {
  const double m = std::abs(1.0 - loop_transfer(f, omega));
  if (m < kMarginalTol) throw MarginalStability("|1 - L| < 1e-12 at omega = " + std::to_string(omega));
  return m * m;
}

// g^2 |h~|^2 (1 - eta2) / eta2, the detector-2 noise fed back into the field.
double fed_back_noise(const LoopFilter& f, const FeedbackBeamline& b, double omega) {
  if (f.gain() == 0.0) return 0.0;
  if (b.eta2 == 0.0) throw DegenerateSplit("eta2 = 0 leaves no in-loop signal for feedback");
  const double h2 = std::norm(f.h_tilde(omega));
  return f.gain() * f.gain() * h2 * (1.0 - b.eta2) / b.eta2;
}

void require_stable(const LoopFilter& f) {
  if (!is_stable(f)) throw UnstableLoop("feedback loop is unstable");
}

Spectrum tabulate(const std::vector<double>& grid, const std::vector<double>& values) {
  Spectrum s;
  s.omega = grid;
  s.value = values;
  return s;
}

}  // namespace

double s2x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega) {
  const double ex = b.s0x(omega) - 1.0;
  return (1.0 + b.eta1 * b.eta2 * ex) / denominator(f, omega);
}

double s3x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega) {
  const double ex = b.s0x(omega) - 1.0;
  const double num = (1.0 - b.eta2) * b.eta1 * ex + fed_back_noise(f, b, omega);
  return 1.0 + num / denominator(f, omega);
}

double s1x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega) {
  const double ex = b.s0x(omega) - 1.0;
  return (1.0 + b.eta1 * ex + fed_back_noise(f, b, omega)) / denominator(f, omega);
}

double s2y_at(const FeedbackBeamline& b, double omega) { return 1.0 + b.eta1 * b.eta2 * (b.s0y(omega) - 1.0); }

double s3y_at(const FeedbackBeamline& b, double omega) {
  return 1.0 + b.eta1 * (1.0 - b.eta2) * (b.s0y(omega) - 1.0);
}

InLoopSpectra in_loop_spectrum(const LoopFilter& f, const FeedbackBeamline& b, const std::vector<double>& grid) {
  b.validate();
  require_stable(f);
  return {tabulate(grid, parallel_map(grid, [&](double w) { return s2x_at(f, b, w); })),
          tabulate(grid, parallel_map(grid, [&](double w) { return s2y_at(b, w); }))};
}

OutOfLoopSpectra out_of_loop_spectrum(const LoopFilter& f, const FeedbackBeamline& b,
                                      const std::vector<double>& grid) {
  b.validate();
  require_stable(f);
  return {tabulate(grid, parallel_map(grid, [&](double w) { return s3x_at(f, b, w); })),
          tabulate(grid, parallel_map(grid, [&](double w) { return s3y_at(b, w); }))};
}

Spectrum s1x_spectrum(const LoopFilter& f, const FeedbackBeamline& b, const std::vector<double>& grid) {
  b.validate();
  require_stable(f);
  return tabulate(grid, parallel_map(grid, [&](double w) { return s1x_at(f, b, w); }));
}

OptimalGain optimal_gain_for_input(const FeedbackBeamline& b, double omega) {
  b.validate();
  const double ex = b.s0x(omega) - 1.0;
  const double in_loop = 1.0 + b.eta2 * b.eta1 * ex;
  if (!(in_loop > 0.0)) throw NumericalError("optimal gain undefined: 1 + eta1 eta2 (S0 - 1) <= 0");
  return {Complex(-b.eta1 * b.eta2 * ex, 0.0), 1.0 + (1.0 - b.eta2) * b.eta1 * ex / in_loop};
}

Complex commutator_factor(const LoopFilter& f, double omega) {
  const Complex d = 1.0 - loop_transfer(f, omega);
  if (std::abs(d) < kMarginalTol) throw MarginalStability("|1 - L| < 1e-12 at omega = " + std::to_string(omega));
  return 1.0 / d;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

}  // namespace qfb::loop
