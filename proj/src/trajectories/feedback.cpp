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

#include "qfb/trajectories/feedback.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qfb/errors.hpp"
#include "qfb/quantum_core/evolve.hpp"

namespace qfb::traj {

using core::Collapse;
using core::Complex;
using core::Matrix;
using core::Operator;

core::LindbladModel feedback_master_equation(const core::LindbladModel& model, const Operator& f, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
  if (model.collapses().empty()) throw ValidationError("feedback model needs a monitored collapse");
  core::require_same_dim(model.dim(), f.dim(), "feedback operator");
  if (!f.is_hermitian()) throw ValidationError("feedback operator F must be Hermitian");
  const auto& c0 = model.collapses().front();
  const Operator c = Complex(std::sqrt(c0.rate)) * c0.op;
  const Operator h = model.hamiltonian() + Complex(0.5) * (c.adjoint() * f + f * c);
  std::vector<Collapse> cols{{1.0, c + Complex(0.0, -1.0) * f}};
  if (eta < 1.0) cols.push_back({(1.0 - eta) / eta, f});
  for (std::size_t k = 1; k < model.collapses().size(); ++k) cols.push_back(model.collapses()[k]);
  return core::LindbladModel(h, std::move(cols)).with_truncation_monitor(model.monitors_truncation());
}

namespace {

double spectral_gap(const Matrix& generator) {
  Eigen::ComplexEigenSolver<Matrix> es(generator, false);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k)) > 1e-8 * scale) gap = std::min(gap, -ev(k).real());
  if (!(gap > 0.0)) throw DegenerateSteadyState("generator has a non-decaying mode besides the steady state");
  return gap;
}

Spectrum transform(const core::LindbladModel& model, const Matrix& x, const Matrix& deviation, double eta,
                   const std::vector<double>& omega, const CorrelationOptions& opt) {
  double gap = spectral_gap(model.superoperator());
  if (std::isinf(gap)) gap = 1.0;
  const double tau_max = opt.decay_lengths / gap;
  const auto n = std::min<std::size_t>(opt.max_points, static_cast<std::size_t>(std::ceil(tau_max / opt.dtau)));
  const double h = tau_max / static_cast<double>(n);
  std::vector<double> tau(n + 1);
  for (std::size_t k = 0; k <= n; ++k) tau[k] = h * static_cast<double>(k);
  const auto corr = core::two_time_correlation(model, Operator(x), deviation, tau, h);
  std::vector<double> g(corr.size());
  for (std::size_t k = 0; k < corr.size(); ++k) g[k] = eta * corr[k].real();

  Spectrum s;
  s.omega = omega;
  s.value.reserve(omega.size());
  for (double w : omega) {
    double acc = 0.5 * (g.front() + g.back() * std::cos(w * tau.back()));
    for (std::size_t k = 1; k < n; ++k) acc += g[k] * std::cos(w * tau[k]);
    s.value.push_back(1.0 + 2.0 * h * acc);
  }
  return s;
}

}  // namespace

Spectrum in_loop_correlation_spectrum(const core::LindbladModel& model_fb, const Operator& c, const Operator& f,
                                      double eta, const std::vector<double>& omega, const CorrelationOptions& opt) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
  core::require_same_dim(model_fb.dim(), c.dim(), "monitored operator");
  core::require_same_dim(model_fb.dim(), f.dim(), "feedback operator");
  const Matrix rho = core::steady_state(model_fb).matrix();
  const Matrix x = c.matrix() + c.matrix().adjoint();
  const Complex i(0.0, 1.0);
  const Matrix left = c.matrix() - (i / eta) * f.matrix();
  const double mean_x = (x * rho).trace().real();
  const Matrix dev = left * rho + rho * left.adjoint() - mean_x * rho;
  return transform(model_fb, x, dev, eta, omega, opt);
}

Spectrum naive_in_loop_correlation_spectrum(const core::LindbladModel& model_fb, const Operator& c, double eta,
                                            const std::vector<double>& omega, const CorrelationOptions& opt) {
  return in_loop_correlation_spectrum(model_fb, c, Operator(Matrix::Zero(c.dim(), c.dim())), eta, omega, opt);
}

}  // namespace qfb::traj
