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

#include "qfb/quantum_core/lindblad.hpp"

#include <cmath>
#include <string>

#include "qfb/errors.hpp"

namespace qfb::core {

LindbladModel::LindbladModel(Operator hamiltonian, std::vector<Collapse> collapses)
    : h_(std::move(hamiltonian)), collapses_(std::move(collapses)) {
  if (!h_.is_hermitian()) throw InvalidState("LindbladModel: Hamiltonian is not Hermitian");
  const Complex i(0.0, 1.0);
  k_ = -i * h_.matrix();
  for (const auto& c : collapses_) {
    require_same_dim(h_.dim(), c.op.dim(), "LindbladModel collapse");
    if (!(c.rate >= 0.0) || !std::isfinite(c.rate))
      throw InvalidState("LindbladModel: collapse rate must be finite and >= 0, got " + std::to_string(c.rate));
    k_ -= 0.5 * c.rate * (c.op.matrix().adjoint() * c.op.matrix());
  }
}

LindbladModel LindbladModel::with_truncation_monitor(bool on) const {
  LindbladModel m = *this;
  m.monitor_truncation_ = on;
  return m;
}

Matrix LindbladModel::apply(const Matrix& rho) const {
  Matrix out = k_ * rho;
  out += rho * k_.adjoint();
  for (const auto& c : collapses_) {
    if (c.rate == 0.0) continue;
    const Matrix& a = c.op.matrix();
    out += c.rate * (a * rho * a.adjoint());
  }
  return out;
}

Matrix left_right_superop(const Matrix& a, const Matrix& b) {
  const Matrix bt = b.transpose();
  const Eigen::Index d = a.rows();
  Matrix s(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s.block(i * d, j * d, d, d) = bt(i, j) * a;
  return s;
}

Matrix LindbladModel::superoperator() const {
  const Eigen::Index d = dim();
  const Matrix id = Matrix::Identity(d, d);
  Matrix s = left_right_superop(k_, id) + left_right_superop(id, k_.adjoint());
  for (const auto& c : collapses_) {
    if (c.rate == 0.0) continue;
    s += c.rate * left_right_superop(c.op.matrix(), c.op.matrix().adjoint());
  }
  return s;
}

Vector vectorize(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvectorize(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw DimensionMismatch("unvectorize: length is not dim^2");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

}  // namespace qfb::core
