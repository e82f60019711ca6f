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
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qfb/common/spectrum.hpp"
#include "qfb/loop_spectra/loop_filter.hpp"

namespace qfb::qnd {

using Complex = std::complex<double>;

// Two cavity modes with decay rates kappa (signal, mode a) and gamma
// (meter, mode c), coupled by (chi/2) x^a y^c.
struct QndParams {
  double kappa;
  double gamma;
  double chi;

  void validate() const;
  // Q = 4 chi / sqrt(gamma kappa)
  double q_factor() const;
};

// Output quadratures in terms of input quadratures at one frequency.
// x_block maps (X_b_in, X_d_in) to (X_b_out, X_d_out); y_block likewise for Y.
struct QuadratureTransfer {
  Eigen::Matrix2cd x_block;
  Eigen::Matrix2cd y_block;
};

QuadratureTransfer quadrature_transfer(const QndParams& p, double omega);

// p~(w) = gamma kappa / ((kappa + 2iw)(gamma + 2iw))
Complex cavity_response(const QndParams& p, double omega);

struct QndFeedbackParams {
  QndParams qnd;
  // Feedback gain, detector response and delay applied to the meter output.
  loop::LoopFilter filter;
  std::function<double(double)> s_in_x = [](double) { return 1.0; };
  std::function<double(double)> s_in_y = [](double) { return 1.0; };
};

// The loop seen by the feedback: the filter cascaded with the two cavity
// poles at kappa/2 and gamma/2.
loop::LoopFilter effective_loop(const QndFeedbackParams& p);

double output_x_at(const QndFeedbackParams& p, double omega);
double output_y_at(const QndFeedbackParams& p, double omega);

struct QndOutputSpectra {
  Spectrum x;
  Spectrum y;
};

// S_out^X = (S_in^X + g^2 / Q^2) / |1 - g p~ h~ e^{-iwT}|^2,
// S_out^Y = S_in^Y + |Q p~|^2. Requires a stable effective loop.
QndOutputSpectra qnd_feedback_output_spectra(const QndFeedbackParams& p, const std::vector<double>& omega_grid);

}  // namespace qfb::qnd
