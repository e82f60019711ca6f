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

#include <cstdint>
#include <optional>
#include <vector>

#include "qfb/loop_spectra/loop_filter.hpp"

namespace qfb::semiclassical {

// Classical excess noise on the input amplitude quadrature: an
// Ornstein-Uhlenbeck process with spectrum excess * corner^2 / (corner^2 + w^2),
// so S0x(w) = 1 + that.
struct ClassicalNoise {
  double excess = 0.0;
  double corner = 1.0;

  double spectrum(double omega) const { return excess * corner * corner / (corner * corner + omega * omega); }
};

struct SemiclassicalSim {
  loop::LoopFilter filter;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double dt = 1e-3;
  double duration = 1.0;
  std::uint64_t seed = 0;
  std::optional<ClassicalNoise> classical_noise;

  // Beamline consistent with this simulation (coherent input plus the
  // classical excess, if any).
  loop::FeedbackBeamline beamline() const;
};

// Normalized photocurrent fluctuations delta I_k / sqrt(I_k) sampled every dt,
// after the burn-in has been discarded.
struct PhotocurrentSeries {
  std::vector<double> i2;
  std::vector<double> i3;
  double dt = 0.0;
  std::size_t burn_in_steps = 0;
  std::size_t delay_steps = 0;
};

// Checks the simulation parameters. Throws SemiclassicalInexpressible for an
// input field whose noise would need a negative classical spectrum,
// DegenerateSplit for eta2 = 0 with feedback, UnstableLoop for an unstable loop.
void validate(const SemiclassicalSim& sim);

// Discrete-time loop: Gaussian shot noise per sample, exact zero-order-hold
// filter update, delay by round(T/dt) samples. Throws DivergenceDetected if
// |X2| exceeds 1e6.
PhotocurrentSeries simulate(const SemiclassicalSim& sim);

// Noise-driven run of the same recursion with no stability precondition.
// True if the amplitude exceeded the divergence threshold within `duration`.
bool diverges_in_time_domain(const loop::LoopFilter& filter, double dt, double duration, std::uint64_t seed);

// Burn-in: ten of the slowest time constants present in the loop.
double burn_in_time(const SemiclassicalSim& sim);

}  // namespace qfb::semiclassical
