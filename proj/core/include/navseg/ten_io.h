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

// Reader/writer for the `.ten` tensor container:
//   bytes 0-3   magic "NSSV"
//   u32 LE      rank
//   rank x u32  dimensions
//   float32 LE  row-major values
#ifndef NAVSEG_TEN_IO_H_
#define NAVSEG_TEN_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "navseg/tensor.h"

namespace navseg {

// Values are narrowed to float32 on encode.
std::vector<uint8_t> EncodeTen(const Tensor& t);
Tensor DecodeTen(const std::vector<uint8_t>& bytes);

void WriteTen(const std::filesystem::path& path, const Tensor& t);
Tensor ReadTen(const std::filesystem::path& path);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<uint8_t>& bytes);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

// 8-bit binary PGM (P5) of a [H, W] tensor with values in [0, 1].
void WritePgm(const std::filesystem::path& path, const Tensor& image);

}  // namespace navseg

#endif  // NAVSEG_TEN_IO_H_
