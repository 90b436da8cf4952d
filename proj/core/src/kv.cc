// Copyright 2026 The navseg Authors.
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

#include "navseg/kv.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "navseg/errors.h"

namespace navseg {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(Trim(item));
  return out;
}

}  // namespace

std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatSig6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

KeyValueList ParseKeyValueText(const std::string& text, const std::string& where) {
  KeyValueList kv;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ":" + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError(where + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

std::string FormatKeyValueText(const KeyValueList& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

const std::string* FindValue(const KeyValueList& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return &v;
  }
  return nullptr;
}

double ParseDoubleValue(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

int64_t ParseIntValue(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  int64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> ParseDoubleList(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : SplitCommas(text)) out.push_back(ParseDoubleValue(item, key));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

std::vector<int64_t> ParseIntList(const std::string& text, const std::string& key) {
  std::vector<int64_t> out;
  for (const std::string& item : SplitCommas(text)) out.push_back(ParseIntValue(item, key));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

std::string FormatDoubleList(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + FormatNumber(values[i]);
  return out;
}

}  // namespace navseg
