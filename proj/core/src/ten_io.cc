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

#include "navseg/ten_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "navseg/errors.h"

namespace navseg {
namespace {

constexpr char kMagic[4] = {'N', 'S', 'S', 'V'};

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 4 > in.size()) throw IoError("truncated .ten header");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

std::vector<uint8_t> EncodeTen(const Tensor& t) {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  PutU32(out, static_cast<uint32_t>(t.rank()));
  for (int d : t.shape()) PutU32(out, static_cast<uint32_t>(d));
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.values()) {
    PutU32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Tensor DecodeTen(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("bad .ten magic");
  }
  size_t pos = 4;
  const uint32_t rank = GetU32(bytes, pos);
  if (rank > 16) throw IoError("implausible .ten rank");
  std::vector<int> shape;
  size_t count = 1;
  for (uint32_t i = 0; i < rank; ++i) {
    const uint32_t d = GetU32(bytes, pos);
    shape.push_back(static_cast<int>(d));
    count *= d;
  }
  if (bytes.size() != pos + 4 * count) throw IoError("truncated .ten payload");
  std::vector<double> values(count);
  for (size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(GetU32(bytes, pos));
  }
  return Tensor(std::move(shape), std::move(values));
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteTen(const std::filesystem::path& path, const Tensor& t) {
  WriteFileBytes(path, EncodeTen(t));
}

Tensor ReadTen(const std::filesystem::path& path) {
  try {
    return DecodeTen(ReadFileBytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void WritePgm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 2) throw InvalidArgument("WritePgm expects [H, W]");
  std::ostringstream os;
  os << "P5\n" << image.dim(1) << ' ' << image.dim(0) << "\n255\n";
  std::string text = os.str();
  for (double v : image.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    text.push_back(static_cast<char>(static_cast<uint8_t>(std::lround(255.0 * c))));
  }
  WriteTextFile(path, text);
}

}  // namespace navseg
