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

#include "navseg/checkpoint.h"

#include <bit>
#include <cstring>

#include "build_info.h"
#include "navseg/errors.h"
#include "navseg/ten_io.h"

namespace navseg {
namespace {

constexpr char kMagic[8] = {'N', 'A', 'V', 'S', 'E', 'G', 'C', 'K'};
constexpr uint32_t kFormatVersion = 1;

class Writer {
 public:
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& in) : in_(in) {}
  void Need(size_t n) const {
    if (pos_ + n > in_.size()) throw IoError("truncated checkpoint");
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s(in_.begin() + static_cast<long>(pos_), in_.begin() + static_cast<long>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  const std::vector<uint8_t>& in_;
  size_t pos_ = 8;
};

}  // namespace

const std::string& Checkpoint::ConfigValue(const std::string& key) const {
  for (const auto& [k, v] : config) {
    if (k == key) return v;
  }
  throw ConfigError("checkpoint is missing config key '" + key + "'");
}

std::vector<uint8_t> EncodeCheckpoint(const Checkpoint& ckpt) {
  std::vector<uint8_t> out(kMagic, kMagic + 8);
  Writer body;
  body.U32(kFormatVersion);
  body.Str(ckpt.kind);
  body.Str(ckpt.provenance);
  body.U32(static_cast<uint32_t>(ckpt.config.size()));
  for (const auto& [k, v] : ckpt.config) {
    body.Str(k);
    body.Str(v);
  }
  body.U32(static_cast<uint32_t>(ckpt.params.size()));
  for (size_t i = 0; i < ckpt.params.size(); ++i) {
    const Tensor& t = ckpt.params.tensor(i);
    body.Str(ckpt.params.name(i));
    body.U32(static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) body.U32(static_cast<uint32_t>(d));
    for (double v : t.values()) body.U64(std::bit_cast<uint64_t>(v));
  }
  std::vector<uint8_t> rest = body.Take();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

Checkpoint DecodeCheckpoint(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw IoError("not a navseg checkpoint");
  }
  Reader r(bytes);
  if (r.U32() != kFormatVersion) throw IoError("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.kind = r.Str();
  ckpt.provenance = r.Str();
  const uint32_t n_config = r.U32();
  for (uint32_t i = 0; i < n_config; ++i) {
    std::string k = r.Str();
    ckpt.config.emplace_back(std::move(k), r.Str());
  }
  const uint32_t n_params = r.U32();
  for (uint32_t i = 0; i < n_params; ++i) {
    std::string name = r.Str();
    const uint32_t rank = r.U32();
    if (rank > 8) throw IoError("implausible parameter rank");
    std::vector<int> shape;
    size_t count = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<int>(r.U32()));
      count *= static_cast<size_t>(shape.back());
    }
    r.Need(8 * count);
    std::vector<double> values(count);
    for (double& v : values) v = std::bit_cast<double>(r.U64());
    ckpt.params.Add(name, Tensor(std::move(shape), std::move(values)));
  }
  if (!r.AtEnd()) throw IoError("trailing bytes in checkpoint");
  return ckpt;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  WriteFileBytes(path, EncodeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  try {
    return DecodeCheckpoint(ReadFileBytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string BuildProvenance() { return NAVSEG_BUILD_DESCRIBE; }

}  // namespace navseg
