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

#include "qfb/loop_spectra/loop_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qfb/errors.hpp"

namespace qfb::loop {

namespace {

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) throw ValidationError(std::string(name) + " must be finite");
}

void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0))
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " + std::to_string(x));
}

}  // namespace

SampledResponse::SampledResponse(std::vector<double> h, double dt) : h_(std::move(h)), dt_(dt) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ValidationError("SampledResponse: dt must be positive");
  if (h_.empty()) throw ValidationError("SampledResponse: no taps");
  const double area = std::accumulate(h_.begin(), h_.end(), 0.0) * dt_;
  if (!(std::abs(area) > 0.0) || !std::isfinite(area))
    throw ValidationError("SampledResponse: taps must integrate to a nonzero finite value");
  for (double& v : h_) v /= area;
}

// Zero-order hold: h(t) = h_k on [k dt, (k+1) dt).
Complex SampledResponse::transfer(double omega) const {
  if (omega == 0.0) return 1.0;
  const Complex i(0.0, 1.0);
  const Complex z = std::exp(-i * omega * dt_);
  const Complex cell = (1.0 - z) / (i * omega);
  // Horner evaluation of sum_k h_k z^k.
  Complex sum = 0.0;
  for (auto it = h_.rbegin(); it != h_.rend(); ++it) sum = sum * z + *it;
  return sum * cell;
}

LoopFilter::LoopFilter(double gain, Response response, double delay, std::vector<double> plant_poles)
    : g_(gain), response_(std::move(response)), t_(delay), poles_(std::move(plant_poles)) {
  require_finite(g_, "loop gain g");
  if (!(t_ >= 0.0) || !std::isfinite(t_)) throw ValidationError("loop delay T must be finite and >= 0");
  if (const auto* p = std::get_if<SinglePole>(&response_))
    if (!(p->gamma > 0.0) || !std::isfinite(p->gamma))
      throw ValidationError("filter pole gamma must be positive, got " + std::to_string(p->gamma));
  for (double p : poles_)
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("plant pole rates must be positive");
}

LoopFilter LoopFilter::with_gain(double g) const { return LoopFilter(g, response_, t_, poles_); }

Complex LoopFilter::h_tilde(double omega) const {
  const Complex i(0.0, 1.0);
  Complex h = std::visit(
      [&](const auto& r) -> Complex {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, SinglePole>)
          return r.gamma / (r.gamma + i * omega);
        else
          return r.transfer(omega);
      },
      response_);
  for (double p : poles_) h *= p / (p + i * omega);
  return h;
}

double LoopFilter::magnitude_bound(double omega) const {
  const double w = std::abs(omega);
  double b = std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, SinglePole>) {
          return r.gamma / std::hypot(r.gamma, w);
        } else {
          // |h~| <= sum |h_k| dt, and summation by parts gives |h~| <= TV / w
          // with TV the total variation of the step function including both ends.
          const auto& h = r.taps();
          double l1 = 0.0, tv = std::abs(h.front()) + std::abs(h.back());
          for (std::size_t k = 0; k < h.size(); ++k) {
            l1 += std::abs(h[k]) * r.dt();
            if (k > 0) tv += std::abs(h[k] - h[k - 1]);
          }
          return w > 0.0 ? std::min(l1, tv / w) : l1;
        }
      },
      response_);
  for (double p : poles_) b *= p / std::hypot(p, w);
  return b;
}

double LoopFilter::characteristic_rate() const {
  double rate = std::visit(
      [](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, SinglePole>)
          return r.gamma;
        else
          return 1.0 / r.support();
      },
      response_);
  for (double p : poles_) rate = std::max(rate, p);
  return rate;
}

void FeedbackBeamline::validate() const {
  require_unit_interval(eta1, "eta1");
  require_unit_interval(eta2, "eta2");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (!s0x || !s0y) throw ValidationError("input spectra must be set");
  // Uncertainty bound on the input, checked on a fixed probe grid.
  for (int k = 0; k <= 256; ++k) {
    const double w = 0.25 * k;
    const double x = s0x(w), y = s0y(w);
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw ValidationError("input spectra must be positive and finite");
    if (x * y < 1.0 - 1e-12)
      throw ValidationError("input spectra violate S0x * S0y >= 1 at omega = " + std::to_string(w));
  }
}

Complex loop_transfer(const LoopFilter& f, double omega) {
  const Complex i(0.0, 1.0);
  return f.gain() * f.h_tilde(omega) * std::exp(-i * omega * f.delay());
}

}  // namespace qfb::loop
