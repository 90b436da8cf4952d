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

// Binary model checkpoints. Layout (all integers little-endian):
//   "NAVSEGCK" | u32 format version | str kind | str provenance |
//   u32 n_config | n_config x (str key, str value) |
//   u32 n_params | n_params x (str name, u32 rank, rank x u32 dims,
//                              f64 values)
// where str is u32 length followed by raw bytes. Parameters are stored at
// full double precision so save -> load is bit-exact.
#ifndef NAVSEG_CHECKPOINT_H_
#define NAVSEG_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "navseg/kv.h"
#include "navseg/nn.h"

namespace navseg {

struct Checkpoint {
  std::string kind;
  std::string provenance;
  KeyValueList config;
  ParamStore params;

  // Value of a config key; throws ConfigError when absent.
  const std::string& ConfigValue(const std::string& key) const;
};

std::vector<uint8_t> EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(const std::vector<uint8_t>& bytes);
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// git-describe style build provenance baked in at configure time.
std::string BuildProvenance();

}  // namespace navseg

#endif  // NAVSEG_CHECKPOINT_H_
