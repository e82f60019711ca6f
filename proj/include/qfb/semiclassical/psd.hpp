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

#include <cstddef>
#include <span>
#include <vector>

#include "qfb/common/spectrum.hpp"

namespace qfb::semiclassical {

// Welch estimate with a periodic Hann window and 50% overlap. Values are
// two-sided densities in the photocurrent normalization: a white series with
// variance 1/dt has a flat spectrum of 1. Bins run over omega_k = 2 pi k / (L dt),
// k = 0 .. L/2.
class WelchAccumulator {
 public:
  WelchAccumulator(std::size_t segment_length, double dt);

  // Adds every full 50%-overlapped segment of `series` after subtracting `mean`.
  void add(std::span<const double> series, double mean);
  void merge(const WelchAccumulator& other);

  std::size_t segment_length() const { return len_; }
  std::size_t segments() const { return count_; }
  // Correlation between estimates from adjacent half-overlapped segments.
  double overlap_correlation() const { return rho_; }

  // Mean over segments, with standard errors from the segment scatter,
  // inflated for the adjacent-segment correlation.
  Spectrum result() const;

 private:
  std::size_t len_;
  double dt_;
  std::vector<double> window_;
  double window_power_ = 0.0;
  double rho_ = 0.0;
  std::vector<double> sum_, sum_sq_;
  std::size_t count_ = 0;
};

// Welch estimate from `n_segments` half-overlapped segments spanning the
// series (segment length 2 N / (n_segments + 1), rounded down to an even
// length with prime factors 2, 3, 5 only). The
// global mean is removed first. Throws TooShort when segments would be
// shorter than 16 samples or n_segments < 2.
Spectrum estimate_psd(std::span<const double> series, double dt, std::size_t n_segments);

// Segments needed for a target relative standard error per bin.
std::size_t segments_for_relative_error(double rel);

}  // namespace qfb::semiclassical
