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

#include <stdexcept>
#include <string>

namespace qfb {

// Two families: bad input (ValidationError) and numerical failure at run time
// (NumericalError). The CLI maps them to exit codes 2 and 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

#define QFB_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  };

QFB_DEFINE_ERROR(DimensionMismatch, ValidationError)
QFB_DEFINE_ERROR(InvalidState, ValidationError)
QFB_DEFINE_ERROR(DegenerateSplit, ValidationError)
QFB_DEFINE_ERROR(SemiclassicalInexpressible, ValidationError)
QFB_DEFINE_ERROR(TooShort, ValidationError)
QFB_DEFINE_ERROR(UnphysicalBath, ValidationError)
QFB_DEFINE_ERROR(DelayTooLarge, ValidationError)
QFB_DEFINE_ERROR(UnreachableSqueezing, ValidationError)
QFB_DEFINE_ERROR(ParseError, ValidationError)
QFB_DEFINE_ERROR(UnknownKey, ValidationError)

QFB_DEFINE_ERROR(JumpFromDarkState, NumericalError)
QFB_DEFINE_ERROR(PositivityViolation, NumericalError)
QFB_DEFINE_ERROR(DegenerateSteadyState, NumericalError)
QFB_DEFINE_ERROR(MarginalStability, NumericalError)
QFB_DEFINE_ERROR(UnstableLoop, NumericalError)
QFB_DEFINE_ERROR(DivergenceDetected, NumericalError)
QFB_DEFINE_ERROR(UnstableMean, NumericalError)
QFB_DEFINE_ERROR(ComplexRoot, NumericalError)
QFB_DEFINE_ERROR(NegativePrefactor, NumericalError)
QFB_DEFINE_ERROR(EnsembleFailure, NumericalError)

#undef QFB_DEFINE_ERROR

}  // namespace qfb
