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

#include "qfb/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qfb/errors.hpp"

namespace qfb::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<bool> parse_bool(const std::string& v) {
  const auto s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

void check_type(const ParamSpec& spec, const std::string& v) {
  const char* first = v.data();
  const char* last = v.data() + v.size();
  bool ok = true;
  switch (spec.type) {
    case ParamType::Real: {
      double x = 0.0;
      const auto r = std::from_chars(first, last, x);
      ok = r.ec == std::errc() && r.ptr == last;
      if (!ok && (lower(v) == "inf" || lower(v) == "-inf")) ok = true;
      break;
    }
    case ParamType::Integer: {
      std::int64_t x = 0;
      const auto r = std::from_chars(first, last, x);
      ok = r.ec == std::errc() && r.ptr == last;
      break;
    }
    case ParamType::Boolean:
      ok = parse_bool(v).has_value();
      break;
    case ParamType::Text:
      break;
  }
  if (!ok) throw ValidationError("parameter '" + spec.name + "': cannot parse '" + v + "'");
}

}  // namespace

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

IniFile parse_ini(std::istream& in, const std::string& origin) {
  IniFile f;
  f.origin = origin;
  f.sections[""];
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const auto where = origin + ":" + std::to_string(line);
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(where + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ParseError(where + ": empty section name");
      f.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(where + ": missing key");
    auto& entries = f.sections[section];
    for (const auto& e : entries)
      if (canonical_key(e.key) == canonical_key(key))
        throw ParseError(where + ": duplicate key '" + key + "' (first on line " + std::to_string(e.line) + ")");
    entries.push_back({key, value, line});
  }
  return f;
}

IniFile load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_ini(in, path);
}

const char* to_string(Source s) {
  switch (s) {
    case Source::Default:
      return "default";
    case Source::File:
      return "file";
    case Source::Flag:
      return "flag";
  }
  return "?";
}

RunConfig::RunConfig(std::string subcommand, const std::vector<ParamSpec>& specs)
    : subcommand_(std::move(subcommand)) {
  for (const auto& s : specs) values_.push_back({s, s.default_value, Source::Default, std::nullopt});
}

void RunConfig::apply_file(const IniFile& file, const std::vector<std::string>& known_sections) {
  std::vector<std::string> unknown;
  for (const auto& [name, entries] : file.sections) {
    const bool mine = name.empty() || name == subcommand_;
    if (!mine) {
      if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end())
        unknown.push_back("[" + name + "]");
      continue;
    }
    for (const auto& e : entries) {
      ParamValue* p = find_mutable(canonical_key(e.key));
      if (!p) {
        unknown.push_back(e.key + " (" + file.origin + ":" + std::to_string(e.line) + ")");
        continue;
      }
      check_type(p->spec, e.value);
      p->value = e.value;
      p->source = Source::File;
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys for '" + subcommand_ + "':";
    for (const auto& u : unknown) msg += " " + u;
    throw UnknownKey(msg);
  }
}

void RunConfig::apply_flag(const std::string& name, const std::string& value) {
  ParamValue* p = find_mutable(name);
  if (!p) throw UnknownKey("unknown parameter '" + name + "' for '" + subcommand_ + "'");
  check_type(p->spec, value);
  if (p->source == Source::File) p->overridden = p->value;
  p->value = value;
  p->source = Source::Flag;
}

bool RunConfig::has(const std::string& name) const {
  return std::any_of(values_.begin(), values_.end(), [&](const ParamValue& v) { return v.spec.name == name; });
}

const ParamValue& RunConfig::find(const std::string& name) const {
  for (const auto& v : values_)
    if (v.spec.name == name) return v;
  throw std::logic_error("parameter '" + name + "' not declared for " + subcommand_);
}

ParamValue* RunConfig::find_mutable(const std::string& name) {
  for (auto& v : values_)
    if (v.spec.name == name) return &v;
  return nullptr;
}

double RunConfig::real(const std::string& name) const {
  const auto& v = find(name).value;
  const auto l = lower(v);
  if (l == "inf") return INFINITY;
  if (l == "-inf") return -INFINITY;
  double x = 0.0;
  std::from_chars(v.data(), v.data() + v.size(), x);
  return x;
}

std::int64_t RunConfig::integer(const std::string& name) const {
  const auto& v = find(name).value;
  std::int64_t x = 0;
  std::from_chars(v.data(), v.data() + v.size(), x);
  return x;
}

std::size_t RunConfig::count(const std::string& name) const {
  const auto x = integer(name);
  if (x < 0) throw ValidationError("parameter '" + name + "' must be non-negative, got " + std::to_string(x));
  return static_cast<std::size_t>(x);
}

bool RunConfig::boolean(const std::string& name) const { return *parse_bool(find(name).value); }

const std::string& RunConfig::text(const std::string& name) const { return find(name).value; }

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "[" << subcommand_ << "]\n";
  for (const auto& v : values_) {
    os << "# " << v.spec.name << ": " << to_string(v.source);
    if (v.overridden) os << " (overrides file value " << *v.overridden << ")";
    os << "\n" << v.spec.name << " = " << v.value << "\n";
  }
  return os.str();
}

}  // namespace qfb::cli
