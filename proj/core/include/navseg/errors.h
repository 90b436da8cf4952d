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

#ifndef NAVSEG_ERRORS_H_
#define NAVSEG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace navseg {

// Precondition violation on an operation's arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem or format failure; the message carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent or unknown configuration (config files, CLI, checkpoints).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace navseg

#endif  // NAVSEG_ERRORS_H_
