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

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qfb::core {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kTolHermitian = 1e-10;
inline constexpr double kTolTrace = 1e-8;
inline constexpr double kTolPositivity = 1e-8;
inline constexpr double kTolJump = 1e-14;

// Square complex matrix with finite entries.
class Operator {
 public:
  explicit Operator(Matrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Operator adjoint() const { return Operator(m_.adjoint()); }
  bool is_hermitian(double tol = kTolHermitian) const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);

 private:
  Matrix m_;
};

// Hermitian, unit-trace, positive semidefinite within the module tolerances.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what);

// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const Matrix& rho);

Complex expect(const Operator& op, const Matrix& rho);
double expect_real(const Operator& op, const Matrix& rho);

Operator identity(Eigen::Index dim);
Operator annihilation(Eigen::Index dim);
Operator creation(Eigen::Index dim);
Operator number(Eigen::Index dim);

// Two-level atom; basis index 0 is the ground state, 1 the excited state.
// Pauli algebra sigma_x sigma_y = i sigma_z, so sigma_y = i (sigma - sigma^dagger),
// the negative of quadrature_y(sigma).
Operator sigma_minus();
Operator sigma_plus();
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();

// x = c + c^dagger and y = -i c + i c^dagger.
Operator quadrature_x(const Operator& c);
Operator quadrature_y(const Operator& c);

DensityMatrix fock_state(Eigen::Index dim, Eigen::Index n);
DensityMatrix pure_state(const Vector& psi);
DensityMatrix maximally_mixed(Eigen::Index dim);

}  // namespace qfb::core
