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

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qfb::cli {

// Flat INI: optional [section] headers, `key = value` lines, full-line
// comments starting with '#' or ';'. Keys before any header belong to the
// root section "".
struct IniEntry {
  std::string key;
  std::string value;
  int line;
};

struct IniFile {
  std::string origin;
  std::map<std::string, std::vector<IniEntry>> sections;
};

// Throws ParseError naming origin:line.
IniFile parse_ini(std::istream& in, const std::string& origin);
IniFile load_ini(const std::string& path);

enum class ParamType { Real, Integer, Boolean, Text };

struct ParamSpec {
  std::string name;
  ParamType type;
  std::string default_value;
  std::string help;
};

enum class Source { Default, File, Flag };

const char* to_string(Source s);

struct ParamValue {
  ParamSpec spec;
  std::string value;
  Source source = Source::Default;
  // Value from the config file when a flag overrode it.
  std::optional<std::string> overridden;
};

// Effective parameters of one run, in declaration order.
class RunConfig {
 public:
  RunConfig(std::string subcommand, const std::vector<ParamSpec>& specs);

  const std::string& subcommand() const { return subcommand_; }
  const std::vector<ParamValue>& values() const { return values_; }

  // Applies the root section and the section named after the subcommand.
  // Sections for other subcommands are ignored; anything else throws
  // UnknownKey listing the offending keys verbatim.
  void apply_file(const IniFile& file, const std::vector<std::string>& known_sections);
  void apply_flag(const std::string& name, const std::string& value);

  bool has(const std::string& name) const;
  double real(const std::string& name) const;
  std::int64_t integer(const std::string& name) const;
  std::size_t count(const std::string& name) const;
  bool boolean(const std::string& name) const;
  const std::string& text(const std::string& name) const;

  // `[subcommand]` block with provenance comments; reloadable by load_ini.
  std::string echo() const;

 private:
  const ParamValue& find(const std::string& name) const;
  ParamValue* find_mutable(const std::string& name);

  std::string subcommand_;
  std::vector<ParamValue> values_;
};

// Accepts '_' for '-' in key names.
std::string canonical_key(std::string key);

}  // namespace qfb::cli
