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

#include "qfb/cli/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qfb::cli {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::comment(const std::string& line) {
  std::istringstream in(line);
  std::string part;
  while (std::getline(in, part)) comments_.push_back(part);
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::logic_error("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

void CsvTable::add_row(const std::vector<double>& row) { add_row(std::vector<Cell>(row.begin(), row.end())); }

void CsvTable::write(std::ostream& os) const {
  for (const auto& c : comments_) os << "# " << c << "\n";
  for (std::size_t k = 0; k < columns_.size(); ++k) os << (k ? "," : "") << quote(columns_[k]);
  os << "\n";
  for (const auto& r : rows_) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) os << ",";
      if (const auto* d = std::get_if<double>(&r[k]))
        os << format_number(*d);
      else
        os << quote(std::get<std::string>(r[k]));
    }
    os << "\n";
  }
}

}  // namespace qfb::cli
