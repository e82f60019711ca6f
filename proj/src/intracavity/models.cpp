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
#include <string>

#include <Eigen/Eigenvalues>

#include "qfb/errors.hpp"
#include "qfb/intracavity/intracavity.hpp"

namespace qfb::intracavity {

using core::Collapse;
using core::Complex;
using core::Matrix;
using core::Operator;

core::LindbladModel linear_cavity_model(const IntracavityParams& p, Eigen::Index cutoff) {
  p.validate();
  if (cutoff < 2) throw ValidationError("Fock cutoff must be at least 2");
  const Operator a = core::annihilation(cutoff);
  const Operator ad = a.adjoint();
  const Matrix a2 = a.matrix() * a.matrix();
  const Operator h(Complex(0.0, p.theta / 4.0) * (a2 - a2.adjoint()));
  std::vector<Collapse> c{{1.0, a}};
  if (p.l > 0.0) c.push_back({p.l / 4.0, ad - a});
  return core::LindbladModel(h, std::move(c)).with_truncation_monitor();
}

Operator feedback_operator(double lambda, Eigen::Index cutoff) {
  return Operator(-lambda / 2.0 * core::quadrature_y(core::annihilation(cutoff)).matrix());
}

core::LindbladModel squeezed_bath_model(double n, std::complex<double> m, const Operator& lowering) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw ValidationError("bath photon number N must be finite and >= 0");
  if (std::norm(m) > n * (n + 1.0) * (1.0 + 1e-12))
    throw UnphysicalBath("|M|^2 = " + std::to_string(std::norm(m)) + " exceeds N(N+1) = " +
                         std::to_string(n * (n + 1.0)));
  const Operator ad = lowering.adjoint();
  const Operator* basis[2] = {&lowering, &ad};
  Eigen::Matrix2cd kmat;
  kmat << n + 1.0, std::conj(m), m, n;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(kmat);
  std::vector<Collapse> c;
  for (int k = 0; k < 2; ++k) {
    const double mu = std::max(0.0, es.eigenvalues()(k));
    if (mu == 0.0) continue;
    Matrix op = Matrix::Zero(lowering.dim(), lowering.dim());
    for (int i = 0; i < 2; ++i) op += es.eigenvectors()(i, k) * basis[i]->matrix();
    c.push_back({mu, Operator(op)});
  }
  return core::LindbladModel(Operator(Matrix::Zero(lowering.dim(), lowering.dim())), std::move(c));
}

}  // namespace qfb::intracavity
