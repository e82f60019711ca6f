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

#include <vector>

#include "qfb/quantum_core/operators.hpp"

namespace qfb::core {

struct Collapse {
  double rate;
  Operator op;
};

// d rho/dt = -i[H, rho] + sum_k rate_k D[L_k] rho.
class LindbladModel {
 public:
  LindbladModel(Operator hamiltonian, std::vector<Collapse> collapses);

  Eigen::Index dim() const { return h_.dim(); }
  const Operator& hamiltonian() const { return h_; }
  const std::vector<Collapse>& collapses() const { return collapses_; }

  // Set on models whose basis is a truncated Fock ladder; evolve() then
  // reports population leaking into the top two levels.
  bool monitors_truncation() const { return monitor_truncation_; }
  LindbladModel with_truncation_monitor(bool on = true) const;

  Matrix apply(const Matrix& rho) const;

  // Column-major vectorized generator: vec(L rho) = superoperator() * vec(rho).
  Matrix superoperator() const;

 private:
  Operator h_;
  std::vector<Collapse> collapses_;
  bool monitor_truncation_ = false;
  // -iH - 1/2 sum rate L^dagger L, so that L rho = K rho + rho K^dagger + jumps.
  Matrix k_;
};

// vec(A X B) = kron(B^T, A) vec(X)
Matrix left_right_superop(const Matrix& a, const Matrix& b);

Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, Eigen::Index dim);

}  // namespace qfb::core
