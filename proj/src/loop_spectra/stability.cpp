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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qfb/errors.hpp"
#include "qfb/loop_spectra/spectra.hpp"

namespace qfb::loop {

namespace {

constexpr double kCriticalTol = 1e-9;
constexpr double kTailLoopBound = 0.25;
constexpr double kMaxPhaseStep = 0.5;
constexpr std::size_t kBaseSamples = std::size_t{1} << 12;
constexpr std::size_t kMaxSamples = std::size_t{1} << 24;

class ContourWalker {
 public:
  explicit ContourWalker(const LoopFilter& f) : f_(f) {}

  Complex at(double omega) const {
    const Complex v = 1.0 - loop_transfer(f_, omega);
    if (std::abs(v) < kCriticalTol)
      throw MarginalStability("loop contour passes the critical point at omega = " + std::to_string(omega));
    return v;
  }

  // Phase change between two samples, bisecting until each piece turns by
  // less than kMaxPhaseStep.
  double phase_change(double w0, Complex f0, double w1, Complex f1, int depth = 0) const {
    const double d = std::arg(f1 / f0);
    if (std::abs(d) < kMaxPhaseStep || depth >= 48) return d;
    const double wm = 0.5 * (w0 + w1);
    const Complex fm = at(wm);
    return phase_change(w0, f0, wm, fm, depth + 1) + phase_change(wm, fm, w1, f1, depth + 1);
  }

 private:
  const LoopFilter& f_;
};

}  // namespace

int unstable_root_count(const LoopFilter& f) {
  if (f.gain() == 0.0) return 0;
  const double g = std::abs(f.gain());
  const double t = f.delay();
  double omega_max = 100.0 * std::max({f.characteristic_rate(), t > 0.0 ? 1.0 / t : 0.0, 1.0});
  // Beyond omega_max the contour stays in a disk of radius 1/4 around 1 and
  // cannot wind around the origin.
  while (g * f.magnitude_bound(omega_max) > kTailLoopBound) {
    omega_max *= 2.0;
    if (omega_max > 1e15) throw NumericalError("is_stable: loop magnitude does not decay");
  }
  const double delay_samples = std::ceil(omega_max * t / 0.2);
  const std::size_t n =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::min(delay_samples, 1e18)), kBaseSamples, kMaxSamples);

  ContourWalker walker(f);
  double w_prev = 0.0;
  Complex f_prev = walker.at(0.0);
  double total = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double w = omega_max * static_cast<double>(k) / static_cast<double>(n - 1);
    const Complex fw = walker.at(w);
    total += walker.phase_change(w_prev, f_prev, w, fw);
    w_prev = w;
    f_prev = fw;
  }
  total += -std::arg(f_prev);
  // The contour runs up the imaginary axis (clockwise about the right half
  // plane); conjugate symmetry doubles the half-line phase change.
  const double zeros = -2.0 * total / (2.0 * std::numbers::pi);
  const double rounded = std::round(zeros);
  if (std::abs(zeros - rounded) > 0.05)
    throw NumericalError("is_stable: winding number not an integer (" + std::to_string(zeros) + ")");
  return static_cast<int>(rounded);
}

bool is_stable(const LoopFilter& f) { return unstable_root_count(f) == 0; }

double max_bandwidth(const LoopFilter& f) {
  if (f.delay() == 0.0 || f.gain() == 0.0) return std::numeric_limits<double>::infinity();
  return std::numbers::pi / (f.delay() * std::abs(f.gain()));
}

}  // namespace qfb::loop
