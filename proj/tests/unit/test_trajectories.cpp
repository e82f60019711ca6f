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
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "qfb/atom_squash/atom_squash.hpp"
#include "qfb/common/parallel.hpp"
#include "qfb/common/philox.hpp"
#include "qfb/errors.hpp"
#include "qfb/intracavity/intracavity.hpp"
#include "qfb/quantum_core/evolve.hpp"
#include "qfb/trajectories/ensemble.hpp"
#include "qfb/trajectories/feedback.hpp"
#include "qfb/trajectories/sme.hpp"

using namespace qfb::traj;
using qfb::Philox;
using qfb::core::Collapse;
using qfb::core::DensityMatrix;
using qfb::core::LindbladModel;
using qfb::core::Operator;

namespace {

LindbladModel damped_cavity(Eigen::Index n) {
  return LindbladModel(Operator(Matrix::Zero(n, n)), {{1.0, qfb::core::annihilation(n)}});
}

LindbladModel driven_atom(double rabi) {
  return LindbladModel(Complex(0.5 * rabi) * qfb::core::sigma_x(), {{1.0, qfb::core::sigma_minus()}});
}

DensityMatrix ground() { return qfb::core::fock_state(2, 0); }

SmeConfig make_config(LindbladModel m, DensityMatrix rho0, Detection d, double dt, std::size_t steps,
                      std::uint64_t seed, std::size_t snap) {
  return SmeConfig{std::move(m), std::move(rho0), d, std::nullopt, dt, steps, seed, snap};
}

// max over checkpoints of |ensemble mean - master equation| / standard error.
double worst_z(const EnsembleSummary& s, const std::vector<DensityMatrix>& exact, const Operator& op) {
  double worst = 0.0;
  const double n = static_cast<double>(s.succeeded);
  for (std::size_t j = 1; j < s.times.size(); ++j) {
    const double me = qfb::core::expect_real(op, exact[j].matrix());
    const double se = std::sqrt(s.observable_variance[0][j] / n) + 1e-12;
    worst = std::max(worst, std::abs(s.observable_mean[0][j] - me) / se);
  }
  return worst;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// 1 + 2 Re eta Tr[x (i w - L)^{-1} D] by a direct linear solve, with the
// rank-one steady-state term removing the null space.
double resolvent_spectrum(const LindbladModel& m, const Matrix& c, const Matrix& f, double eta, double w) {
  const auto d = m.dim();
  const Matrix rho = qfb::core::steady_state(m).matrix();
  const Matrix x = c + c.adjoint();
  const Complex i(0.0, 1.0);
  const Matrix left = c - (i / eta) * f;
  const Matrix dev = left * rho + rho * left.adjoint() - (x * rho).trace().real() * rho;
  const Matrix id = Matrix::Identity(d * d, d * d);
  const qfb::core::Vector one = qfb::core::vectorize(Matrix::Identity(d, d));
  const Matrix sys = i * w * id - m.superoperator() + qfb::core::vectorize(rho) * one.adjoint();
  const qfb::core::Vector y = sys.partialPivLu().solve(qfb::core::vectorize(dev));
  return 1.0 + 2.0 * eta * (x * qfb::core::unvectorize(y, d)).trace().real();
}

}  // namespace

TEST_CASE("philox known answers") {
  using B = Philox::Block;
  CHECK(Philox::round10(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox::round10(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox::round10(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  Philox a(42, 3), b(42 ^ 3, 0);
  for (int k = 0; k < 10; ++k) CHECK(a.next_u32() == b.next_u32());
  Philox r(7);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = r.uniform();
    CHECK_FALSE((u <= 0.0 || u >= 1.0));
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("photon counting steps") {
  const auto cav = damped_cavity(4);
  Philox rng(1);
  const Matrix vac = qfb::core::fock_state(4, 0).matrix();
  for (int k = 0; k < 1000; ++k) {
    const auto out = step_photon_counting(vac, cav, 1e-2, rng);
    CHECK(out.sample == 0.0);
    CHECK(oracle::max_abs(out.rho - vac) < 1e-15);
  }
  Matrix rho = qfb::core::fock_state(4, 1).matrix();
  bool jumped = false;
  for (int k = 0; k < 100000 && !jumped; ++k) {
    auto out = step_photon_counting(rho, cav, 1e-2, rng);
    rho = out.rho;
    if (out.sample == 1.0) {
      jumped = true;
      CHECK(oracle::max_abs(rho - vac) < 1e-14);
    } else {
      CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
    }
  }
  CHECK(jumped);
  // beta = 0 local oscillator is plain counting, draw for draw.
  Philox r1(9), r2(9);
  const Matrix start = qfb::core::fock_state(4, 2).matrix();
  const auto a = step_homodyne_jump(start, cav, 0.0, 1e-2, r1);
  const auto b = step_photon_counting(start, cav, 1e-2, r2);
  CHECK(oracle::max_abs(a.rho - b.rho) < 1e-15);
  CHECK(a.sample == b.sample);
}

TEST_CASE("homodyne jump rate from the local oscillator alone") {
  const double beta = 3.0, dt = 1e-3;
  auto cfg = make_config(damped_cavity(3), qfb::core::fock_state(3, 0), HomodyneJump{beta}, dt, 200000, 5, 0);
  const auto r = run_trajectory(cfg);
  const double counts = std::accumulate(r.record.begin(), r.record.end(), 0.0);
  const double p = beta * beta * dt, n = static_cast<double>(cfg.steps);
  CHECK(std::abs(counts - n * p) < 4.0 * std::sqrt(n * p * (1.0 - p)));
  CHECK(r.jump_times.size() == static_cast<std::size_t>(counts));
}

TEST_CASE("config validation") {
  auto cfg = make_config(damped_cavity(3), qfb::core::fock_state(3, 0), HomodyneJump{20.0}, 1e-3, 10, 1, 0);
  CHECK_THROWS_AS(cfg.validate(), qfb::ValidationError);
  cfg.detection = HomodyneDiffusive{1.5};
  CHECK_THROWS_AS(cfg.validate(), qfb::ValidationError);
  cfg.detection = HomodyneDiffusive{0.5};
  cfg.feedback = FeedbackSpec{qfb::core::quadrature_y(qfb::core::annihilation(3)), Delayed{0.0105}};
  CHECK_THROWS_AS(cfg.validate(), qfb::ValidationError);
  cfg.feedback->mode = Delayed{0.01};
  CHECK_NOTHROW(cfg.validate());
  cfg.feedback->f = qfb::core::annihilation(3);
  CHECK_THROWS_AS(cfg.validate(), qfb::ValidationError);
  cfg.feedback.reset();
  cfg.detection = PhotonCounting{};
  cfg.dt = 0.2;
  CHECK_THROWS_AS(cfg.validate(), qfb::ValidationError);
}

TEST_CASE("zero feedback is bit-identical to plain homodyne") {
  auto cfg = make_config(driven_atom(1.3), ground(), HomodyneDiffusive{0.7}, 1e-3, 3000, 17, 100);
  const auto plain = run_trajectory(cfg);
  cfg.feedback = FeedbackSpec{Operator(Matrix::Zero(2, 2)), Markovian{}};
  const auto fb = run_trajectory(cfg);
  CHECK(plain.record == fb.record);
  CHECK(plain.final_state == fb.final_state);
  Philox r1(3), r2(3);
  const Matrix rho = ground().matrix();
  const auto a = step_homodyne_diffusive(rho, driven_atom(1.3), 0.7, 1e-3, r1);
  const auto b = step_homodyne_feedback(rho, driven_atom(1.3), Operator(Matrix::Zero(2, 2)), 0.7, 1e-3, r2);
  CHECK(a.rho == b.rho);
  CHECK(a.sample == b.sample);
}

TEST_CASE("trace and positivity along a trajectory") {
  auto cfg = make_config(driven_atom(2.0), ground(), HomodyneDiffusive{1.0}, 1e-3, 2000, 4, 1);
  cfg.feedback = FeedbackSpec{Complex(-0.4) * qfb::core::sigma_y(), Markovian{}};
  const auto r = run_trajectory(cfg);
  for (const auto& s : r.snapshots) {
    CHECK(std::abs(s.trace().real() - 1.0) < 1e-13);
    CHECK(qfb::core::min_eigenvalue(s) > -1e-12);
  }
  CHECK(r.record.size() == cfg.steps);
  CHECK(r.snapshots.size() == cfg.steps + 1);
}

TEST_CASE("ensemble means reproduce the master equations") {
  const std::size_t n = 400;
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);

  SUBCASE("photon counting, damped cavity") {
    const auto cav = damped_cavity(3);
    auto cfg = make_config(cav, qfb::core::fock_state(3, 1), PhotonCounting{}, 1e-3, 1000, 21, 100);
    EnsembleOptions opt;
    opt.observables.push_back(expectation("n", qfb::core::number(3)));
    const auto s = run_ensemble(cfg, n, opt);
    const auto exact = qfb::core::evolve_series(cav, cfg.rho0, times);
    CHECK(worst_z(s, exact, qfb::core::number(3)) < 4.0);
    // Binomial error around e^-1 at t = 1.
    const double p = std::exp(-1.0);
    CHECK(std::abs(s.observable_mean[0].back() - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
  }
  SUBCASE("diffusive homodyne, driven atom") {
    const auto atom = driven_atom(1.5);
    auto cfg = make_config(atom, ground(), HomodyneDiffusive{0.8}, 1e-3, 1000, 22, 100);
    EnsembleOptions opt;
    opt.observables.push_back(expectation("sz", qfb::core::sigma_z()));
    const auto s = run_ensemble(cfg, n, opt);
    const auto exact = qfb::core::evolve_series(atom, ground(), times);
    CHECK(worst_z(s, exact, qfb::core::sigma_z()) < 4.0);
    for (std::size_t j = 0; j < s.times.size(); ++j)
      CHECK(oracle::max_abs(s.mean_state[j] - exact[j].matrix()) < 0.1);
  }
  SUBCASE("Markovian feedback, driven atom") {
    const auto atom = driven_atom(1.5);
    const Operator f = Complex(-0.3) * qfb::core::sigma_y();
    auto cfg = make_config(atom, ground(), HomodyneDiffusive{0.8}, 1e-3, 1000, 23, 100);
    cfg.feedback = FeedbackSpec{f, Markovian{}};
    EnsembleOptions opt;
    opt.observables.push_back(expectation("sx", qfb::core::sigma_x()));
    const auto s = run_ensemble(cfg, n, opt);
    const auto exact = qfb::core::evolve_series(feedback_master_equation(atom, f, 0.8), ground(), times);
    CHECK(worst_z(s, exact, qfb::core::sigma_x()) < 4.0);
  }
}

TEST_CASE("ensemble output is independent of the thread count") {
  auto cfg = make_config(driven_atom(1.0), ground(), HomodyneDiffusive{0.9}, 1e-3, 512, 99, 64);
  cfg.feedback = FeedbackSpec{Complex(0.2) * qfb::core::sigma_y(), Markovian{}};
  EnsembleOptions opt;
  opt.observables.push_back(expectation("sz", qfb::core::sigma_z()));
  opt.psd_segment_length = 128;
  opt.block = 7;
  const int saved = qfb::max_threads();
  qfb::set_threads(1);
  const auto one = run_ensemble(cfg, 30, opt);
  qfb::set_threads(4);
  const auto four = run_ensemble(cfg, 30, opt);
  qfb::set_threads(saved);
  const auto serial = run_ensemble_serial(cfg, 30, opt);
  for (const auto* other : {&four, &serial}) {
    CHECK(one.observable_mean == other->observable_mean);
    CHECK(one.observable_variance == other->observable_variance);
    CHECK(one.psd->value == other->psd->value);
    CHECK(one.record_mean == other->record_mean);
    for (std::size_t j = 0; j < one.mean_state.size(); ++j) CHECK(one.mean_state[j] == other->mean_state[j]);
  }
  // A one-trajectory ensemble is that trajectory.
  const auto single = run_trajectory(cfg, 0);
  const auto ens = run_ensemble(cfg, 1, opt);
  for (std::size_t j = 0; j < single.snapshots.size(); ++j) CHECK(ens.mean_state[j] == single.snapshots[j]);
}

TEST_CASE("jump detection approaches diffusive detection as beta grows") {
  const double dt = 2.5e-4;
  const std::size_t bin = 200, bins = 2000;
  const double bin_t = dt * static_cast<double>(bin);
  auto cav = damped_cavity(2);
  auto diff_cfg = make_config(cav, qfb::core::fock_state(2, 0), HomodyneDiffusive{1.0}, dt, bin * bins, 8, 0);
  const auto diff = run_trajectory(diff_cfg);
  std::vector<double> ref;
  for (std::size_t b = 0; b < bins; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < bin; ++k) s += diff.record[b * bin + k] * dt;
    ref.push_back(s / std::sqrt(bin_t));
  }
  std::vector<double> dist;
  for (double beta : {4.0, 8.0, 16.0}) {
    auto cfg = make_config(cav, qfb::core::fock_state(2, 0), HomodyneJump{beta}, dt, bin * bins, 9, 0);
    const auto r = run_trajectory(cfg);
    std::vector<double> scaled;
    for (std::size_t b = 0; b < bins; ++b) {
      double counts = 0.0;
      for (std::size_t k = 0; k < bin; ++k) counts += r.record[b * bin + k];
      scaled.push_back((counts - beta * beta * bin_t) / (beta * std::sqrt(bin_t)));
    }
    dist.push_back(ks_distance(scaled, ref));
  }
  CHECK(dist[0] > dist[1]);
  CHECK(dist[1] > dist[2]);
}

TEST_CASE("one-step delay matches Markovian feedback statistics") {
  const auto atom = driven_atom(1.5);
  const Operator f = Complex(-0.3) * qfb::core::sigma_y();
  auto cfg = make_config(atom, ground(), HomodyneDiffusive{0.8}, 1e-3, 1000, 31, 100);
  EnsembleOptions opt;
  opt.observables.push_back(expectation("sx", qfb::core::sigma_x()));
  cfg.feedback = FeedbackSpec{f, Markovian{}};
  const auto mk = run_ensemble(cfg, 400, opt);
  cfg.feedback = FeedbackSpec{f, Delayed{1e-3}};
  cfg.seed = 32;
  const auto dl = run_ensemble(cfg, 400, opt);
  for (std::size_t j = 1; j < mk.times.size(); ++j) {
    const double se = std::sqrt((mk.observable_variance[0][j] + dl.observable_variance[0][j]) / 400.0);
    CHECK(std::abs(mk.observable_mean[0][j] - dl.observable_mean[0][j]) < 3.0 * se + 1e-3);
  }
  // Delay lines hold the feedback at zero until filled.
  DelayLine line(3);
  CHECK(line.push(1.0) == 0.0);
  CHECK(line.push(2.0) == 0.0);
  CHECK(line.push(3.0) == 0.0);
  CHECK(line.push(4.0) == 1.0);
  CHECK(line.push(5.0) == 2.0);
  DelayLine now(0);
  CHECK(now.push(7.0) == 7.0);
}

TEST_CASE("conditioned variance follows the Riccati equation") {
  using namespace qfb::intracavity;
  const IntracavityParams p{0.2, 0.3, 1.0, Measurement::Homodyne, 1.0};
  const Eigen::Index n = 16;
  const auto model = linear_cavity_model(p, n);
  const auto rho0 = qfb::core::steady_state(model);
  const double lam = optimal_lambda(p);
  auto cfg = make_config(model, rho0, HomodyneDiffusive{1.0}, 1e-3, 4000, 41, 500);
  cfg.feedback = FeedbackSpec{feedback_operator(lam, n), Markovian{}};
  EnsembleOptions opt;
  opt.observables.push_back(qfb::traj::conditioned_variance("vx", qfb::core::quadrature_x(qfb::core::annihilation(n))));
  opt.mean_state = false;
  const std::size_t n_traj = 24;
  const auto s = run_ensemble(cfg, n_traj, opt);
  const auto riccati = conditioned_variance_trajectory(p, p.u0(), s.times);
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    const double se = std::sqrt(s.observable_variance[0][j] / n_traj);
    CHECK(std::abs((s.observable_mean[0][j] - 1.0) - riccati[j]) < 3.0 * se + 5e-3);
  }
  CHECK(std::abs(riccati.back() - conditioned_variance(p)) < 5e-3);
}

TEST_CASE("feedback master equation") {
  const auto atom = driven_atom(0.7);
  const Operator zero(Matrix::Zero(2, 2));
  CHECK(oracle::max_abs(feedback_master_equation(atom, zero, 0.6).superoperator() - atom.superoperator()) < 1e-15);
  const Operator f = Complex(0.4) * qfb::core::sigma_y();
  CHECK(feedback_master_equation(atom, f, 1.0).collapses().size() == 1);
  CHECK(feedback_master_equation(atom, f, 0.5).collapses().size() == 2);

  // Literal generator D[c] - i[F, c rho + rho c^dagger] + (1/eta) D[F] - i[H, rho].
  const Matrix c = qfb::core::sigma_minus().matrix(), h = atom.hamiltonian().matrix(), fm = f.matrix();
  const double eta = 0.55;
  const Complex i(0.0, 1.0);
  const Matrix lit = oracle::superoperator_of(2, [&](const Matrix& r) -> Matrix {
    return -i * oracle::commutator(h, r) + oracle::lindblad_D(c, r) -
           i * oracle::commutator(fm, oracle::mul(c, r) + oracle::mul(r, c.adjoint())) +
           (1.0 / eta) * oracle::lindblad_D(fm, r);
  });
  CHECK(oracle::max_abs(feedback_master_equation(atom, f, eta).superoperator() - lit) < 1e-12);

  for (double lam : {-0.76, -0.2, 0.9}) {
    const auto ap = qfb::atom::AtomLoopParams::from_lambda(0.8, 0.95, lam);
    const auto decay = LindbladModel(Operator(Matrix::Zero(2, 2)), {{1.0, qfb::core::sigma_minus()}});
    const auto general =
        feedback_master_equation(decay, Complex(0.5 * ap.lambda()) * qfb::core::sigma_y(), 0.8 * 0.95);
    CHECK(oracle::max_abs(general.superoperator() -
                          qfb::atom::atom_feedback_master_equation(ap).superoperator()) < 1e-12);
  }
}

TEST_CASE("correlation spectrum") {
  SUBCASE("vacuum without feedback is shot-noise limited") {
    const auto cav = damped_cavity(4);
    const auto s = in_loop_correlation_spectrum(cav, qfb::core::annihilation(4), Operator(Matrix::Zero(4, 4)), 1.0,
                                                {0.0, 0.5, 3.0});
    for (double v : s.value) CHECK(std::abs(v - 1.0) < 1e-12);
  }
  SUBCASE("driven atom against the resolvent") {
    const auto atom = driven_atom(1.2);
    const Operator f = Complex(-0.35) * qfb::core::sigma_y();
    const double eta = 0.7;
    const auto fb = feedback_master_equation(atom, f, eta);
    const std::vector<double> w{0.0, 0.3, 1.0, 2.5};
    const auto s = in_loop_correlation_spectrum(fb, qfb::core::sigma_minus(), f, eta, w);
    const auto naive = naive_in_loop_correlation_spectrum(fb, qfb::core::sigma_minus(), eta, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      CHECK(std::abs(s.value[k] - resolvent_spectrum(fb, qfb::core::sigma_minus().matrix(), f.matrix(), eta, w[k])) <
            1e-4);
      CHECK(std::abs(naive.value[k] - resolvent_spectrum(fb, qfb::core::sigma_minus().matrix(),
                                                         Matrix::Zero(2, 2), eta, w[k])) < 1e-4);
    }
    CHECK(std::abs(s.value[0] - naive.value[0]) > 1e-2);
  }
  SUBCASE("linear cavity matches the linearized closed form") {
    using namespace qfb::intracavity;
    const IntracavityParams p{0.0, 0.3, 0.8, Measurement::Homodyne, 1.0};
    const Eigen::Index n = 14;
    const auto cav = linear_cavity_model(p, n);
    const double uc = conditioned_variance(p), ls = optimal_lambda(p);
    const std::vector<double> w{0.0, 0.4, 1.5};
    for (double lam : {ls, ls + 0.5}) {
      const Operator f = feedback_operator(lam, n);
      const auto fb = feedback_master_equation(cav, f, p.eta);
      const auto s = in_loop_correlation_spectrum(fb, qfb::core::annihilation(n), f, p.eta, w);
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double a = p.k0() + p.eta * uc, b = p.k0() + lam;
        CHECK(std::abs(s.value[k] - (a * a + w[k] * w[k]) / (b * b + w[k] * w[k])) < 2e-3);
      }
      if (lam == ls) CHECK(std::abs(s.value[0] - 1.0) < 2e-3);
      if (lam > ls) CHECK(s.value[0] < 0.9);
    }
  }
}
