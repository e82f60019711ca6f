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
#include "qfb/loop_spectra/loop_filter.hpp"

namespace qfb::loop {

inline constexpr double kMarginalTol = 1e-12;

// Nyquist winding count of zeros of 1 - g H(s) e^{-sT} in Re s > 0.
// Throws MarginalStability if the contour passes within 1e-9 of the
// critical point.
int unstable_root_count(const LoopFilter& f);
bool is_stable(const LoopFilter& f);

// pi / (T |g|); +inf when T = 0 or g = 0.
double max_bandwidth(const LoopFilter& f);

// Per-frequency closed forms. These check nothing about loop stability.
double s2x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega);
double s3x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega);
double s1x_at(const LoopFilter& f, const FeedbackBeamline& b, double omega);
double s2y_at(const FeedbackBeamline& b, double omega);
double s3y_at(const FeedbackBeamline& b, double omega);

// Grid spectra. Every function below requires a stable loop (UnstableLoop
// otherwise) and raises MarginalStability at a grid point where |1 - L| < 1e-12.
struct InLoopSpectra {
  Spectrum x;
  Spectrum y;
};
struct OutOfLoopSpectra {
  Spectrum x;
  Spectrum y;
};

InLoopSpectra in_loop_spectrum(const LoopFilter& f, const FeedbackBeamline& b,
                               const std::vector<double>& omega_grid);
OutOfLoopSpectra out_of_loop_spectrum(const LoopFilter& f, const FeedbackBeamline& b,
                                      const std::vector<double>& omega_grid);
// Intra-loop field ahead of the beamsplitter.
Spectrum s1x_spectrum(const LoopFilter& f, const FeedbackBeamline& b, const std::vector<double>& omega_grid);

// Closed-form optimum of S3x at one frequency for a fixed input excess.
struct OptimalGain {
  Complex loop_value;  // L = -eta1 eta2 (S0 - 1)
  double s3x;          // 1 + (1-eta2) eta1 (S0-1) / (1 + eta2 eta1 (S0-1))
};
OptimalGain optimal_gain_for_input(const FeedbackBeamline& b, double omega);

// Factor 1 / (1 - L(w)) multiplying the open-loop commutator.
Complex commutator_factor(const LoopFilter& f, double omega);

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

}  // namespace qfb::loop
