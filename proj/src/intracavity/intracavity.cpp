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

#include "qfb/intracavity/intracavity.hpp"

#include <cmath>
#include <string>

#include "qfb/errors.hpp"

namespace qfb::intracavity {

namespace {

bool homodyne(const IntracavityParams& p) { return p.mode == Measurement::Homodyne; }

// k0^2 + eta (D0 - 2 k0) written as a sum of non-negative terms; the roots
// below use the rationalized forms so that nothing cancels near threshold.
double homodyne_discriminant(const IntracavityParams& p) {
  const double t = p.theta;
  return ((1.0 - t) * (1.0 - t) + 4.0 * t * (1.0 - p.eta) + 4.0 * p.eta * p.l) / 4.0;
}

double discriminant_root(double a, double b) {
  const double d = a * a + b;
  if (d < 0.0) throw ComplexRoot("variance quadratic has complex roots (discriminant " + std::to_string(d) + ")");
  return std::sqrt(d);
}

}  // namespace

void IntracavityParams::validate() const {
  if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("l must be finite and >= 0");
  if (!(theta >= 0.0 && theta < 1.0))
    throw ValidationError("theta must lie in [0, 1) (threshold excluded), got " + std::to_string(theta));
  if (mode == Measurement::Homodyne) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1], got " + std::to_string(eta));
  } else if (!(qnd_strength > 0.0) || !std::isfinite(qnd_strength)) {
    throw ValidationError("QND measurement strength H must be positive");
  }
}

double riccati_rhs_homodyne(const IntracavityParams& p, double u) {
  return -2.0 * p.k0() * u - 2.0 * p.k0() + p.d0() - p.eta * u * u;
}

double riccati_rhs_qnd(const IntracavityParams& p, double v) {
  return -2.0 * p.k0() * v + p.d0() - p.qnd_strength * v * v;
}

double mean_noise_coefficient(const IntracavityParams& p, double variance, double lambda) {
  const double s = homodyne(p) ? p.eta : p.qnd_strength;
  return std::sqrt(s) * variance - lambda / std::sqrt(s);
}

std::vector<double> conditioned_variance_trajectory(const IntracavityParams& p, double initial,
                                                     const std::vector<double>& t_grid, double dt) {
  p.validate();
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  auto rhs = [&](double x) { return homodyne(p) ? riccati_rhs_homodyne(p, x) : riccati_rhs_qnd(p, x); };
  std::vector<double> out;
  out.reserve(t_grid.size());
  double t = 0.0, x = initial;
  for (double target : t_grid) {
    if (!(target >= t)) throw ValidationError("time grid must be ascending and >= 0");
    const double span = target - t;
    const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = n ? span / static_cast<double>(n) : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double k1 = rhs(x), k2 = rhs(x + 0.5 * h * k1), k3 = rhs(x + 0.5 * h * k2), k4 = rhs(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t = target;
    out.push_back(x);
  }
  return out;
}

double conditioned_variance(const IntracavityParams& p) {
  p.validate();
  const double k0 = p.k0();
  if (homodyne(p)) return (p.l - p.theta) / (k0 + std::sqrt(homodyne_discriminant(p)));
  return p.d0() / (k0 + discriminant_root(k0, p.qnd_strength * p.d0()));
}

double optimal_lambda(const IntracavityParams& p) {
  p.validate();
  const double k0 = p.k0();
  // -k0 + sqrt(k0^2 + 2 eta k0 U0); 2 k0 U0 = l - theta.
  if (homodyne(p)) return p.eta * (p.l - p.theta) / (k0 + std::sqrt(homodyne_discriminant(p)));
  return p.qnd_strength * p.d0() / (k0 + discriminant_root(k0, p.qnd_strength * p.d0()));
}

double unconditioned_variance(const IntracavityParams& p, double lambda) {
  p.validate();
  const double k = p.k0() + lambda;
  if (!(k > 0.0)) throw UnstableMean("k0 + lambda = " + std::to_string(k) + " leaves the mean undamped");
  // Conditioned variance plus the stationary spread of the conditioned mean;
  // equal to (k0 U0 + lambda^2 / 2 eta) / (k0 + lambda) for homodyne and
  // (D0 + lambda^2 / H) / (2 (k0 + lambda)) for QND.
  const double c = conditioned_variance(p);
  const double b = mean_noise_coefficient(p, c, lambda);
  return c + b * b / (2.0 * k);
}

double unconditioned_variance_delayed(const IntracavityParams& p, double lambda, double delay) {
  if (!(delay >= 0.0)) throw ValidationError("delay must be >= 0");
  if (!(std::abs(lambda * delay) < 0.5))
    throw DelayTooLarge("|lambda T| = " + std::to_string(std::abs(lambda * delay)) +
                        " is outside the first-order regime (< 0.5)");
  return unconditioned_variance(p, lambda) * (1.0 + lambda * delay);
}

double u_min(const IntracavityParams& p) {
  p.validate();
  if (homodyne(p) && p.eta == 1.0) {
    const double k0 = p.k0();
    const double r0 = (p.d0() - 2.0 * k0) / (k0 * k0);
    const double one_plus_r0 = homodyne_discriminant(p) / (k0 * k0);
    return k0 * r0 / (1.0 + std::sqrt(one_plus_r0));
  }
  return conditioned_variance(p);
}

}  // namespace qfb::intracavity
