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

#include "qfb/semiclassical/psd.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include <unsupported/Eigen/FFT>

#include "qfb/errors.hpp"

namespace qfb::semiclassical {

namespace {

constexpr std::size_t kMinSegment = 16;

// Largest even n' <= n whose only prime factors are 2, 3 and 5.
std::size_t smooth_floor(std::size_t n) {
  for (std::size_t m = n - n % 2; m >= 2; m -= 2) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
  return 0;
}

}  // namespace

WelchAccumulator::WelchAccumulator(std::size_t segment_length, double dt) : len_(segment_length), dt_(dt) {
  if (len_ < kMinSegment || len_ % 2)
    throw TooShort("Welch segment length must be even and >= 16, got " + std::to_string(len_));
  if (!(dt_ > 0.0)) throw ValidationError("Welch: dt must be positive");
  window_.resize(len_);
  for (std::size_t n = 0; n < len_; ++n)
    window_[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(len_)));
  double lag = 0.0;
  for (std::size_t n = 0; n < len_; ++n) {
    window_power_ += window_[n] * window_[n];
    if (n + len_ / 2 < len_) lag += window_[n] * window_[n + len_ / 2];
  }
  rho_ = (lag * lag) / (window_power_ * window_power_);
  sum_.assign(len_ / 2 + 1, 0.0);
  sum_sq_.assign(len_ / 2 + 1, 0.0);
}

void WelchAccumulator::add(std::span<const double> series, double mean) {
  if (series.size() < len_) return;
  Eigen::FFT<double> fft;
  std::vector<double> seg(len_);
  std::vector<std::complex<double>> spec;
  const std::size_t hop = len_ / 2;
  const double scale = dt_ / window_power_;
  for (std::size_t start = 0; start + len_ <= series.size(); start += hop) {
    for (std::size_t n = 0; n < len_; ++n) seg[n] = window_[n] * (series[start + n] - mean);
    fft.fwd(spec, seg);
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      const double p = scale * std::norm(spec[k]);
      sum_[k] += p;
      sum_sq_[k] += p * p;
    }
    ++count_;
  }
}

void WelchAccumulator::merge(const WelchAccumulator& other) {
  if (other.len_ != len_ || other.dt_ != dt_) throw ValidationError("Welch: merging incompatible accumulators");
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    sum_[k] += other.sum_[k];
    sum_sq_[k] += other.sum_sq_[k];
  }
  count_ += other.count_;
}

Spectrum WelchAccumulator::result() const {
  if (count_ < 2) throw TooShort("Welch: need at least two segments");
  Spectrum s;
  const double k_seg = static_cast<double>(count_);
  const double inflation = 1.0 + 2.0 * rho_ * (k_seg - 1.0) / k_seg;
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    s.omega.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(len_) * dt_));
    const double mean = sum_[k] / k_seg;
    const double var = std::max(0.0, (sum_sq_[k] - k_seg * mean * mean) / (k_seg - 1.0));
    s.value.push_back(mean);
    s.standard_error.push_back(std::sqrt(var * inflation / k_seg));
  }
  return s;
}

Spectrum estimate_psd(std::span<const double> series, double dt, std::size_t n_segments) {
  if (n_segments < 2) throw TooShort("estimate_psd: need at least two segments");
  const std::size_t len = smooth_floor(2 * series.size() / (n_segments + 1));
  if (len < kMinSegment)
    throw TooShort("estimate_psd: series of " + std::to_string(series.size()) + " samples is too short for " +
                   std::to_string(n_segments) + " segments");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  WelchAccumulator acc(len, dt);
  acc.add(series, mean);
  return acc.result();
}

std::size_t segments_for_relative_error(double rel) {
  if (!(rel > 0.0)) throw ValidationError("relative error must be positive");
  // Relative variance of a Hann/50% Welch bin is about (1 + 2 rho^2) / K, rho = 1/6.
  const double factor = 1.0 + 2.0 / 36.0;
  return static_cast<std::size_t>(std::ceil(factor / (rel * rel)));
}

}  // namespace qfb::semiclassical
