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

#include "qfb/quantum_core/superop.hpp"

#include "qfb/errors.hpp"

namespace qfb::core {

Matrix superop_D(const Operator& a, const Matrix& b) {
  require_same_dim(a.dim(), b.rows(), "superop_D");
  const Matrix& A = a.matrix();
  const Matrix AdA = A.adjoint() * A;
  return A * b * A.adjoint() - 0.5 * (AdA * b + b * AdA);
}

Matrix superop_G(const Operator& r, const Matrix& rho) {
  require_same_dim(r.dim(), rho.rows(), "superop_G");
  const Matrix& R = r.matrix();
  const Matrix jumped = R * rho * R.adjoint();
  const double p = jumped.trace().real();
  if (!(p > kTolJump)) throw JumpFromDarkState("superop_G: Tr[r rho r^dagger] below tolerance");
  return jumped / p - rho;
}

Matrix superop_H(const Operator& r, const Matrix& rho) {
  require_same_dim(r.dim(), rho.rows(), "superop_H");
  const Matrix s = r.matrix() * rho + rho * r.matrix().adjoint();
  return s - s.trace() * rho;
}

Matrix commutator_term(const Operator& h, const Matrix& rho) {
  require_same_dim(h.dim(), rho.rows(), "commutator_term");
  const Complex i(0.0, 1.0);
  return -i * (h.matrix() * rho - rho * h.matrix());
}

}  // namespace qfb::core
