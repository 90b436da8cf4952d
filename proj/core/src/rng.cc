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

#include "navseg/rng.h"

#include <cmath>

namespace navseg {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t DeriveSeed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x6e61767365670001ULL;
  for (uint64_t p : parts) h = SplitMix64(h ^ SplitMix64(p));
  return h;
}

double UniformOpen(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = 0.0;
  while (u <= 0.0 || u >= 1.0) u = dist(rng);
  return u;
}

double UniformIn(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformOpen(rng);
}

double StandardNormal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double StandardGumbel(Rng& rng) { return -std::log(-std::log(UniformOpen(rng))); }

}  // namespace navseg
