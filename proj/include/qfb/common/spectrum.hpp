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

#include <cstddef>
#include <vector>

namespace qfb {

// Values on an angular-frequency grid. Estimated spectra carry standard
// errors; closed-form spectra leave the vector empty.
struct Spectrum {
  std::vector<double> omega;
  std::vector<double> value;
  std::vector<double> standard_error;

  std::size_t size() const { return omega.size(); }
  bool has_errors() const { return !standard_error.empty(); }
};

}  // namespace qfb
