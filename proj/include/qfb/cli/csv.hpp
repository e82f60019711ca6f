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

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace qfb::cli {

// %.17g: round-trip exact for doubles.
std::string format_number(double x);

using Cell = std::variant<double, std::string>;

// Comment header lines, a column header row and data rows. Strings are
// quoted only when they contain a comma, quote or newline.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void comment(const std::string& line);
  void add_row(std::vector<Cell> row);
  void add_row(const std::vector<double>& row);

  std::size_t rows() const { return rows_.size(); }
  void write(std::ostream& os) const;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace qfb::cli
