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

// Plain `key = value` text, the format of every configuration-like file.
#ifndef NAVSEG_KV_H_
#define NAVSEG_KV_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace navseg {

using KeyValueList = std::vector<std::pair<std::string, std::string>>;

// Shortest decimal text that round-trips to the same double.
std::string FormatNumber(double v);
// Six significant digits, for reports.
std::string FormatSig6(double v);

// Parses `key = value` lines; blank lines and `#` comments are skipped.
// Duplicate keys and lines without '=' raise ConfigError naming `where`.
KeyValueList ParseKeyValueText(const std::string& text, const std::string& where);
std::string FormatKeyValueText(const KeyValueList& kv);

const std::string* FindValue(const KeyValueList& kv, const std::string& key);

// Strict conversions; ConfigError mentions `key` on failure.
double ParseDoubleValue(const std::string& text, const std::string& key);
int64_t ParseIntValue(const std::string& text, const std::string& key);
std::vector<double> ParseDoubleList(const std::string& text, const std::string& key);
std::vector<int64_t> ParseIntList(const std::string& text, const std::string& key);
std::string FormatDoubleList(const std::vector<double>& values);

}  // namespace navseg

#endif  // NAVSEG_KV_H_
