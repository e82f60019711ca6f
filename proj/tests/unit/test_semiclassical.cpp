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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "qfb/common/philox.hpp"
#include "qfb/errors.hpp"
#include "qfb/loop_spectra/spectra.hpp"
#include "qfb/semiclassical/psd.hpp"
#include "qfb/semiclassical/simulate.hpp"

using namespace qfb::semiclassical;
using qfb::loop::LoopFilter;
using qfb::loop::SinglePole;

namespace {

// Fraction of bins in [lo, hi] whose estimate lies within k standard errors.
template <class F>
double coverage(const qfb::Spectrum& s, F&& truth, double lo, double hi, double k) {
  int in = 0, total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.omega[i] < lo || s.omega[i] > hi) continue;
    ++total;
    if (std::abs(s.value[i] - truth(s.omega[i])) <= k * s.standard_error[i]) ++in;
  }
  return total ? static_cast<double>(in) / total : 0.0;
}

SemiclassicalSim base_sim(double g, double gamma, double t) {
  return SemiclassicalSim{LoopFilter(g, SinglePole{gamma}, t), 1.0, 1.0, 0.005, 0.0, 1, std::nullopt};
}

}  // namespace

TEST_CASE("Welch estimate of white shot noise is flat at one") {
  const double dt = 0.01;
  qfb::Philox rng(42);
  std::vector<double> x(400000);
  for (double& v : x) v = rng.normal() / std::sqrt(dt);
  const auto s = estimate_psd(x, dt, 200);
  CHECK(coverage(s, [](double) { return 1.0; }, 0.5, 300.0, 3.0) > 0.98);
  double mean_rel_se = 0.0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) mean_rel_se += s.standard_error[k];
  mean_rel_se /= static_cast<double>(s.size() - 2);
  CHECK(std::abs(mean_rel_se - std::sqrt(1.0556 / 200.0)) < 0.01);
}

TEST_CASE("Welch estimate of an Ornstein-Uhlenbeck process") {
  const double dt = 0.01, kappa = 2.0, a = 5.0;
  qfb::Philox rng(9);
  std::vector<double> x(500000);
  double v = 0.0;
  const double decay = std::exp(-kappa * dt), kick = std::sqrt(a * kappa / 2.0 * (1.0 - decay * decay));
  for (double& s : x) {
    s = v;
    v = decay * v + kick * rng.normal();
  }
  const auto s = estimate_psd(x, dt, 150);
  // Exact spectrum of the sampled AR(1) process.
  auto truth = [&](double w) {
    const double c = std::cos(w * dt);
    return dt * a * kappa / 2.0 * (1.0 - decay * decay) / (1.0 - 2.0 * decay * c + decay * decay);
  };
  CHECK(coverage(s, truth, 0.2, 20.0, 3.0) > 0.95);
}

TEST_CASE("PSD input checks") {
  std::vector<double> x(100, 1.0);
  CHECK_THROWS_AS(estimate_psd(x, 0.1, 20), qfb::TooShort);
  CHECK_THROWS_AS(estimate_psd(x, 0.1, 1), qfb::TooShort);
  CHECK(segments_for_relative_error(0.1) == 106);
}

TEST_CASE("open loop photocurrents carry shot noise plus split classical excess") {
  SemiclassicalSim sim = base_sim(0.0, 1.0, 0.0);
  sim.eta1 = 0.8;
  sim.eta2 = 0.6;
  sim.duration = 3000.0;
  sim.classical_noise = ClassicalNoise{4.0, 1.5};
  const auto r = simulate(sim);
  const auto s2 = estimate_psd(r.i2, r.dt, 120);
  const auto s3 = estimate_psd(r.i3, r.dt, 120);
  const auto b = sim.beamline();
  CHECK(coverage(s2, [&](double w) { return 1.0 + 0.48 * sim.classical_noise->spectrum(w); }, 0.1, 10.0, 3.0) > 0.9);
  CHECK(coverage(s3, [&](double w) { return 1.0 + 0.32 * sim.classical_noise->spectrum(w); }, 0.1, 10.0, 3.0) > 0.9);
  CHECK(std::abs(b.s0x(0.0) - 5.0) < 1e-15);
}

TEST_CASE("closed loop photocurrents follow the in-loop and out-of-loop spectra") {
  SemiclassicalSim sim = base_sim(-3.0, 1.0, 0.1);
  sim.eta1 = 0.9;
  sim.eta2 = 0.5;
  sim.duration = 4000.0;
  const auto r = simulate(sim);
  const auto b = sim.beamline();
  const auto s2 = estimate_psd(r.i2, r.dt, 120);
  const auto s3 = estimate_psd(r.i3, r.dt, 120);
  CHECK(coverage(s2, [&](double w) { return qfb::loop::s2x_at(sim.filter, b, w); }, 0.1, 8.0, 3.0) > 0.9);
  CHECK(coverage(s3, [&](double w) { return qfb::loop::s3x_at(sim.filter, b, w); }, 0.1, 8.0, 3.0) > 0.9);
  CHECK(r.delay_steps == 20);
}

TEST_CASE("simulation is reproducible from its seed") {
  SemiclassicalSim sim = base_sim(-2.0, 1.0, 0.1);
  sim.duration = 50.0;
  const auto a = simulate(sim), b = simulate(sim);
  CHECK(a.i2 == b.i2);
  CHECK(a.i3 == b.i3);
  sim.seed = 2;
  CHECK(simulate(sim).i2 != a.i2);
}

TEST_CASE("simulation preconditions") {
  SemiclassicalSim sim = base_sim(-10.0, 1.0, 1.0);
  sim.duration = 100.0;
  CHECK_THROWS_AS(simulate(sim), qfb::UnstableLoop);
  sim = base_sim(-1.0, 1.0, 0.1);
  sim.duration = 100.0;
  sim.classical_noise = ClassicalNoise{-0.5, 1.0};
  CHECK_THROWS_AS(simulate(sim), qfb::SemiclassicalInexpressible);
  sim.classical_noise.reset();
  sim.eta2 = 0.0;
  CHECK_THROWS_AS(simulate(sim), qfb::DegenerateSplit);
  sim.eta2 = 1.0;
  sim.dt = 0.1;
  CHECK_THROWS_AS(simulate(sim), qfb::ValidationError);
  sim.dt = 0.005;
  sim.duration = 1.0;
  CHECK_THROWS_AS(simulate(sim), qfb::TooShort);
}

TEST_CASE("time-domain divergence probe") {
  CHECK(diverges_in_time_domain(LoopFilter(-10.0, SinglePole{1.0}, 1.0), 0.01, 200.0, 3));
  CHECK_FALSE(diverges_in_time_domain(LoopFilter(-10.0, SinglePole{0.1}, 1.0), 0.01, 200.0, 3));
  CHECK(diverges_in_time_domain(LoopFilter(1.5, SinglePole{1.0}, 0.0), 0.01, 200.0, 3));
}
