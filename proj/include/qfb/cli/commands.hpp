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

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "qfb/cli/config.hpp"
#include "qfb/cli/csv.hpp"

namespace qfb::cli {

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "QFB_OUTPUT_DIR";

const char* version();

struct Command {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  // Whether the run draws random numbers (the header then records the seed).
  bool stochastic = false;
  std::function<CsvTable(const RunConfig&)> execute;
};

const std::vector<Command>& commands();

// Entry point. Exit codes: 0 success, 2 invalid input (including parse
// errors and unknown keys), 3 numerical failure, 1 anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace qfb::cli
