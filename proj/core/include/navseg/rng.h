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

#ifndef NAVSEG_RNG_H_
#define NAVSEG_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace navseg {

using Rng = std::mt19937_64;

// Mixes a tuple of integers into one 64-bit seed (splitmix64 chaining), so
// every (seed, stream, index, ...) combination gets an independent stream.
uint64_t DeriveSeed(std::initializer_list<uint64_t> parts);

inline Rng MakeRng(std::initializer_list<uint64_t> parts) {
  return Rng(DeriveSeed(parts));
}

// Uniform on the open interval (0, 1).
double UniformOpen(Rng& rng);
double UniformIn(Rng& rng, double lo, double hi);
double StandardNormal(Rng& rng);
double StandardGumbel(Rng& rng);

}  // namespace navseg

#endif  // NAVSEG_RNG_H_
