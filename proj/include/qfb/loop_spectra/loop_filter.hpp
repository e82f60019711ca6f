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
#include <variant>
#include <vector>

namespace qfb::loop {

using Complex = std::complex<double>;

// h(t) = gamma e^{-gamma t}, so h~(w) = gamma / (gamma + i w).
struct SinglePole {
  double gamma;
};

// Piecewise-constant response on a grid of spacing dt, rescaled so that
// sum_k h_k dt = 1.
class SampledResponse {
 public:
  SampledResponse(std::vector<double> h, double dt);

  const std::vector<double>& taps() const { return h_; }
  double dt() const { return dt_; }
  double support() const { return dt_ * static_cast<double>(h_.size()); }
  Complex transfer(double omega) const;

 private:
  std::vector<double> h_;
  double dt_;
};

using Response = std::variant<SinglePole, SampledResponse>;

// Loop gain g, normalized response h and pure delay T. Optional extra
// cascade poles (rates p_j, each p_j / (p_j + i w)) model plant dynamics
// that sit inside the loop, such as a cavity in front of the detector.
class LoopFilter {
 public:
  LoopFilter(double gain, Response response, double delay, std::vector<double> plant_poles = {});

  double gain() const { return g_; }
  double delay() const { return t_; }
  const Response& response() const { return response_; }
  const std::vector<double>& plant_poles() const { return poles_; }

  LoopFilter with_gain(double g) const;

  // h~(w), times the plant poles.
  Complex h_tilde(double omega) const;
  // Upper bound on |h~(w')| for all w' >= w; non-increasing in w.
  double magnitude_bound(double omega) const;
  // Largest characteristic rate of the response and plant (1/s).
  double characteristic_rate() const;

 private:
  double g_;
  Response response_;
  double t_;
  std::vector<double> poles_;
};

// Beamsplitter/detector parameters and the input spectra S0x(w), S0y(w).
struct FeedbackBeamline {
  double beta = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  std::function<double(double)> s0x = [](double) { return 1.0; };
  std::function<double(double)> s0y = [](double) { return 1.0; };

  void validate() const;
};

// L(w) = g h~(w) e^{-i w T}
Complex loop_transfer(const LoopFilter& f, double omega);

}  // namespace qfb::loop
