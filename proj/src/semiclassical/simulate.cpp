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

#include "qfb/semiclassical/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfb/common/philox.hpp"
#include "qfb/errors.hpp"
#include "qfb/loop_spectra/spectra.hpp"

namespace qfb::semiclassical {

namespace {

constexpr double kDivergence = 1e6;

// Filter, plant poles and delay line of the loop, advanced one sample at a time.
class LoopRecursion {
 public:
  LoopRecursion(const loop::LoopFilter& f, double dt) : g_(f.gain()) {
    if (const auto* p = std::get_if<loop::SinglePole>(&f.response())) {
      pole_decay_ = std::exp(-p->gamma * dt);
    } else {
      const auto& r = std::get<loop::SampledResponse>(f.response());
      if (std::abs(r.dt() - dt) > 1e-9 * dt)
        throw ValidationError("sampled response spacing must equal the simulation dt");
      for (double h : r.taps()) taps_.push_back(h * r.dt());
      history_.assign(taps_.size(), 0.0);
    }
    for (double p : f.plant_poles()) {
      plant_decay_.push_back(std::exp(-p * dt));
      plant_state_.push_back(0.0);
    }
    delay_ = static_cast<std::size_t>(std::llround(f.delay() / dt));
    line_.assign(delay_ + 1, 0.0);
  }

  std::size_t delay_steps() const { return delay_; }

  // g y_{n-D}, where y_n is the filter-chain output built from samples before n.
  double feedback() const { return g_ * line_[head_]; }

  // Feeds sample u_n through the chain, producing y_{n+1}.
  void push(double u) {
    double y;
    if (taps_.empty()) {
      filter_state_ = pole_decay_ * filter_state_ + (1.0 - pole_decay_) * u;
      y = filter_state_;
    } else {
      // y_{n+1} = sum_k h_k dt u_{n-k}
      history_[hist_head_] = u;
      y = 0.0;
      std::size_t idx = hist_head_;
      for (double w : taps_) {
        y += w * history_[idx];
        idx = idx == 0 ? history_.size() - 1 : idx - 1;
      }
      hist_head_ = (hist_head_ + 1) % history_.size();
    }
    for (std::size_t j = 0; j < plant_state_.size(); ++j) {
      plant_state_[j] = plant_decay_[j] * plant_state_[j] + (1.0 - plant_decay_[j]) * y;
      y = plant_state_[j];
    }
    line_[head_] = y;
    head_ = (head_ + 1) % line_.size();
  }

 private:
  double g_;
  double pole_decay_ = 0.0;
  double filter_state_ = 0.0;
  std::vector<double> taps_, history_;
  std::size_t hist_head_ = 0;
  std::vector<double> plant_decay_, plant_state_;
  std::size_t delay_ = 0;
  // Ring of the last delay_ + 1 outputs; head_ points at the oldest.
  std::vector<double> line_;
  std::size_t head_ = 0;
};

class OrnsteinUhlenbeck {
 public:
  OrnsteinUhlenbeck(const ClassicalNoise& n, double dt, Philox& rng)
      : decay_(std::exp(-n.corner * dt)),
        kick_(std::sqrt(n.excess * n.corner / 2.0 * (1.0 - std::exp(-2.0 * n.corner * dt)))) {
    x_ = std::sqrt(n.excess * n.corner / 2.0) * rng.normal();
  }
  double value() const { return x_; }
  void advance(Philox& rng) { x_ = decay_ * x_ + kick_ * rng.normal(); }

 private:
  double decay_, kick_, x_ = 0.0;
};

}  // namespace

loop::FeedbackBeamline SemiclassicalSim::beamline() const {
  loop::FeedbackBeamline b;
  b.eta1 = eta1;
  b.eta2 = eta2;
  if (classical_noise) {
    const ClassicalNoise n = *classical_noise;
    b.s0x = [n](double w) { return 1.0 + n.spectrum(w); };
  }
  return b;
}

double burn_in_time(const SemiclassicalSim& sim) {
  double slowest = std::max(1.0 / sim.filter.characteristic_rate(), sim.filter.delay());
  for (double p : sim.filter.plant_poles()) slowest = std::max(slowest, 1.0 / p);
  if (const auto* s = std::get_if<loop::SampledResponse>(&sim.filter.response()))
    slowest = std::max(slowest, s->support());
  if (sim.classical_noise) slowest = std::max(slowest, 1.0 / sim.classical_noise->corner);
  return 10.0 * slowest;
}

void validate(const SemiclassicalSim& sim) {
  if (!(sim.eta1 >= 0.0 && sim.eta1 <= 1.0)) throw ValidationError("eta1 must lie in [0, 1]");
  if (!(sim.eta2 >= 0.0 && sim.eta2 <= 1.0)) throw ValidationError("eta2 must lie in [0, 1]");
  if (sim.eta2 == 0.0 && sim.filter.gain() != 0.0) throw DegenerateSplit("eta2 = 0 leaves no in-loop signal");
  if (!(sim.dt > 0.0)) throw ValidationError("dt must be positive");
  if (sim.classical_noise) {
    if (!(sim.classical_noise->corner > 0.0)) throw ValidationError("classical noise corner must be positive");
    if (sim.classical_noise->excess < 0.0)
      throw SemiclassicalInexpressible("input noise below shot noise has no classical-noise representation");
  }
  double fastest = 1.0 / sim.filter.characteristic_rate();
  if (sim.filter.delay() > 0.0) fastest = std::min(fastest, sim.filter.delay());
  if (sim.dt > fastest / 20.0 * (1.0 + 1e-12))
    throw ValidationError("dt must be at most min(1/gamma, T)/20 = " + std::to_string(fastest / 20.0));
  if (!(sim.duration > burn_in_time(sim)))
    throw TooShort("duration " + std::to_string(sim.duration) + " does not exceed the burn-in " +
                   std::to_string(burn_in_time(sim)));
  if (!loop::is_stable(sim.filter)) throw UnstableLoop("semiclassical simulation of an unstable loop");
}

PhotocurrentSeries simulate(const SemiclassicalSim& sim) {
  validate(sim);
  Philox rng(sim.seed);
  LoopRecursion loop(sim.filter, sim.dt);
  std::optional<OrnsteinUhlenbeck> ou;
  if (sim.classical_noise && sim.classical_noise->excess > 0.0) ou.emplace(*sim.classical_noise, sim.dt, rng);

  const std::size_t steps = static_cast<std::size_t>(std::llround(sim.duration / sim.dt));
  const std::size_t burn = static_cast<std::size_t>(std::ceil(burn_in_time(sim) / sim.dt));
  const double shot = 1.0 / std::sqrt(sim.dt);
  const double a2 = std::sqrt(sim.eta1 * sim.eta2);
  const double a3 = std::sqrt(sim.eta1 * (1.0 - sim.eta2));
  const double r3 = sim.eta2 > 0.0 ? std::sqrt((1.0 - sim.eta2) / sim.eta2) : 0.0;

  PhotocurrentSeries out;
  out.dt = sim.dt;
  out.burn_in_steps = burn;
  out.delay_steps = loop.delay_steps();
  out.i2.reserve(steps - burn);
  out.i3.reserve(steps - burn);
  for (std::size_t n = 0; n < steps; ++n) {
    const double x0 = ou ? ou->value() : 0.0;
    const double fb = loop.feedback();
    const double x2 = a2 * x0 + fb;
    if (!(std::abs(x2) <= kDivergence))
      throw DivergenceDetected("|X2| exceeded 1e6 at t = " + std::to_string(n * sim.dt));
    const double i2 = x2 + shot * rng.normal();
    const double i3 = a3 * x0 + r3 * fb + shot * rng.normal();
    loop.push(i2);
    if (ou) ou->advance(rng);
    if (n >= burn) {
      out.i2.push_back(i2);
      out.i3.push_back(i3);
    }
  }
  return out;
}

bool diverges_in_time_domain(const loop::LoopFilter& filter, double dt, double duration, std::uint64_t seed) {
  Philox rng(seed);
  LoopRecursion loop(filter, dt);
  const std::size_t steps = static_cast<std::size_t>(std::llround(duration / dt));
  const double shot = 1.0 / std::sqrt(dt);
  for (std::size_t n = 0; n < steps; ++n) {
    const double x2 = loop.feedback();
    if (!(std::abs(x2) <= kDivergence)) return true;
    loop.push(x2 + shot * rng.normal());
  }
  return false;
}

}  // namespace qfb::semiclassical
