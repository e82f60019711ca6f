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

#include "qfb/quantum_core/operators.hpp"

namespace qfb::core {

// D[A]B = A B A^dagger - (A^dagger A B + B A^dagger A) / 2
Matrix superop_D(const Operator& a, const Matrix& b);

// G[r]rho = r rho r^dagger / Tr[r rho r^dagger] - rho.
// Throws JumpFromDarkState when the jump probability vanishes.
Matrix superop_G(const Operator& r, const Matrix& rho);

// H[r]rho = r rho + rho r^dagger - Tr[r rho + rho r^dagger] rho
Matrix superop_H(const Operator& r, const Matrix& rho);

// -i[H, rho]
Matrix commutator_term(const Operator& h, const Matrix& rho);

}  // namespace qfb::core
