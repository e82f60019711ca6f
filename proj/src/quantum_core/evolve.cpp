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

#include "qfb/quantum_core/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>
#include <string>

#include <Eigen/SVD>

#include "qfb/errors.hpp"

namespace qfb::core {

namespace {

std::size_t step_count(double span, double dt) {
  if (span <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

class Rk4Integrator {
 public:
  Rk4Integrator(const LindbladModel& model, EvolveDiagnostics& diag) : model_(model), diag_(diag) {}

  void advance(Matrix& rho, double span, double dt) {
    const std::size_t n = step_count(span, dt);
    if (n == 0) return;
    const double h = span / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) step(rho, h);
  }

 private:
  void step(Matrix& rho, double h) {
    k1_ = model_.apply(rho);
    tmp_ = rho + 0.5 * h * k1_;
    k2_ = model_.apply(tmp_);
    tmp_ = rho + 0.5 * h * k2_;
    k3_ = model_.apply(tmp_);
    tmp_ = rho + h * k3_;
    k4_ = model_.apply(tmp_);
    rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    tmp_ = 0.5 * (rho + rho.adjoint());
    rho.swap(tmp_);
    ++diag_.steps;
    const double tr_err = std::abs(rho.trace() - Complex(1.0));
    diag_.max_trace_error = std::max(diag_.max_trace_error, tr_err);
    if (tr_err > kTolTrace) throw NumericalError("evolve: trace drifted by " + std::to_string(tr_err));
    if (model_.monitors_truncation() && rho.rows() >= 2) {
      const Eigen::Index d = rho.rows();
      const double top = rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
      diag_.top_level_population = std::max(diag_.top_level_population, top);
      if (top > kTruncationThreshold) diag_.truncation_warning = true;
    }
  }

  const LindbladModel& model_;
  EvolveDiagnostics& diag_;
  Matrix k1_, k2_, k3_, k4_, tmp_;
};

DensityMatrix finish(const Matrix& rho, EvolveDiagnostics& diag) {
  diag.min_eigenvalue = min_eigenvalue(rho);
  if (diag.min_eigenvalue < -kTolPositivity)
    throw PositivityViolation("evolve: eigenvalue " + std::to_string(diag.min_eigenvalue));
  return DensityMatrix(rho);
}

void report_truncation(const EvolveDiagnostics& diag, const EvolveDiagnostics* user) {
  if (diag.truncation_warning && user == nullptr)
    std::clog << "warning: truncation: top-level population " << diag.top_level_population << "\n";
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("evolve: dt must be positive");
}

}  // namespace

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t, double dt,
                     EvolveDiagnostics* diag) {
  require_same_dim(model.dim(), rho0.dim(), "evolve");
  check_dt(dt);
  if (!(t >= 0.0)) throw ValidationError("evolve: t must be >= 0");
  EvolveDiagnostics local;
  Matrix rho = rho0.matrix();
  Rk4Integrator(model, local).advance(rho, t, dt);
  DensityMatrix out = finish(rho, local);
  report_truncation(local, diag);
  if (diag) *diag = local;
  return out;
}

std::vector<DensityMatrix> evolve_series(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<double>& times, double dt,
                                         EvolveDiagnostics* diag) {
  require_same_dim(model.dim(), rho0.dim(), "evolve_series");
  check_dt(dt);
  EvolveDiagnostics local;
  Rk4Integrator integrator(model, local);
  Matrix rho = rho0.matrix();
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    if (!(target >= t)) throw ValidationError("evolve_series: times must be ascending and >= 0");
    integrator.advance(rho, target - t, dt);
    t = target;
    out.push_back(finish(rho, local));
  }
  report_truncation(local, diag);
  if (diag) *diag = local;
  return out;
}

DensityMatrix steady_state(const LindbladModel& model) {
  const Eigen::Index d = model.dim();
  const Matrix s = model.superoperator();
  Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() ? sv(0) : 0.0);
  Eigen::Index kernel = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-9 * scale) ++kernel;
  if (kernel != 1)
    throw DegenerateSteadyState("steady_state: null space has dimension " + std::to_string(kernel));
  const Vector v = svd.matrixV().col(sv.size() - 1);
  Matrix rho = unvectorize(v, d);
  rho /= rho.trace();
  rho = (0.5 * (rho + rho.adjoint())).eval();
  const double residual = model.apply(rho).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * scale) throw NumericalError("steady_state: residual " + std::to_string(residual));
  return DensityMatrix(rho);
}

Matrix rk4_propagator(const Matrix& generator, double h) {
  const Eigen::Index n = generator.rows();
  const Matrix a = h * generator;
  Matrix term = Matrix::Identity(n, n);
  Matrix p = term;
  for (int k = 1; k <= 4; ++k) {
    term = (a * term / static_cast<double>(k)).eval();
    p += term;
  }
  return p;
}

std::vector<Complex> two_time_correlation(const LindbladModel& model, const Operator& left,
                                          const Matrix& initial_deviation,
                                          const std::vector<double>& tau_grid, double dt) {
  const Eigen::Index d = model.dim();
  require_same_dim(d, left.dim(), "two_time_correlation");
  require_same_dim(d, initial_deviation.rows(), "two_time_correlation");
  check_dt(dt);
  const Matrix s = model.superoperator();
  // A uniform grid reuses one propagator; step sizes equal to 1e-9 relative
  // (grid rounding) share an entry.
  std::vector<std::pair<double, Matrix>> cache;
  auto propagator = [&](double h) -> const Matrix& {
    for (const auto& [hc, p] : cache)
      if (std::abs(hc - h) <= 1e-9 * h) return p;
    cache.emplace_back(h, rk4_propagator(s, h));
    return cache.back().second;
  };
  // Tr[left X] = vec(left^T) . vec(X)
  const Matrix left_t = left.matrix().transpose();
  const Vector lt = vectorize(left_t);
  Vector x = vectorize(initial_deviation);
  std::vector<Complex> out;
  out.reserve(tau_grid.size());
  double tau = 0.0;
  for (double target : tau_grid) {
    if (!(target >= tau)) throw ValidationError("two_time_correlation: tau grid must be ascending and >= 0");
    const std::size_t n = step_count(target - tau, dt);
    if (n > 0) {
      const Matrix& p = propagator((target - tau) / static_cast<double>(n));
      for (std::size_t k = 0; k < n; ++k) x = p * x;
    }
    tau = target;
    out.push_back((lt.array() * x.array()).sum());
  }
  return out;
}

}  // namespace qfb::core
