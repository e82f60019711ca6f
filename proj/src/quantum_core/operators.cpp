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

#include "qfb/quantum_core/operators.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qfb/errors.hpp"

namespace qfb::core {

namespace {

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw DimensionMismatch(std::string(what) + ": matrix must be square with dim >= 1");
  if (!m.allFinite()) throw InvalidState(std::string(what) + ": non-finite entry");
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) { require_square_finite(m_, "Operator"); }

bool Operator::is_hermitian(double tol) const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim(), "operator+");
  return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim(), "operator-");
  return Operator(a.m_ - b.m_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim(), "operator*");
  return Operator(a.m_ * b.m_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  require_square_finite(m_, "DensityMatrix");
  const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kTolHermitian) throw InvalidState("DensityMatrix: not Hermitian (" + std::to_string(herm) + ")");
  const double tr_err = std::abs(m_.trace() - Complex(1.0));
  if (tr_err > kTolTrace) throw InvalidState("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
  const double lmin = min_eigenvalue(m_);
  if (lmin < -kTolPositivity) throw InvalidState("DensityMatrix: eigenvalue " + std::to_string(lmin));
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b)
    throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
}

double min_eigenvalue(const Matrix& rho) {
  const Matrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Complex expect(const Operator& op, const Matrix& rho) {
  require_same_dim(op.dim(), rho.rows(), "expect");
  // Tr[A rho] without forming the product.
  return (op.matrix().transpose().array() * rho.array()).sum();
}

double expect_real(const Operator& op, const Matrix& rho) { return expect(op, rho).real(); }

Operator identity(Eigen::Index dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator annihilation(Eigen::Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a));
}

Operator creation(Eigen::Index dim) { return annihilation(dim).adjoint(); }

Operator number(Eigen::Index dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return Operator(std::move(n));
}

Operator sigma_minus() { return annihilation(2); }
Operator sigma_plus() { return creation(2); }
Operator sigma_x() { return quadrature_x(sigma_minus()); }
Operator sigma_y() { return Operator(-1.0 * quadrature_y(sigma_minus()).matrix()); }

Operator sigma_z() {
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = -1.0;
  z(1, 1) = 1.0;
  return Operator(std::move(z));
}

Operator quadrature_x(const Operator& c) { return Operator(c.matrix() + c.matrix().adjoint()); }

Operator quadrature_y(const Operator& c) {
  const Complex i(0.0, 1.0);
  return Operator(-i * c.matrix() + i * c.matrix().adjoint());
}

DensityMatrix fock_state(Eigen::Index dim, Eigen::Index n) {
  if (n < 0 || n >= dim) throw DimensionMismatch("fock_state: level outside cutoff");
  Matrix rho = Matrix::Zero(dim, dim);
  rho(n, n) = 1.0;
  return DensityMatrix(std::move(rho));
}

DensityMatrix pure_state(const Vector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidState("pure_state: zero vector");
  const Vector v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

}  // namespace qfb::core
