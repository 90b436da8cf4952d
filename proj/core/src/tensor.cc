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

#include "navseg/tensor.h"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

#include "navseg/errors.h"

namespace navseg {
namespace {

size_t NumElements(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw InvalidArgument("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != NumElements(shape_)) {
    throw InvalidArgument("tensor value count does not match shape " +
                          ShapeString(shape_));
  }
}

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::AddScaled(const Tensor& other, double scale) {
  if (other.shape_ != shape_) {
    throw InvalidArgument("AddScaled shape mismatch " + ShapeString(shape_) +
                          " vs " + ShapeString(other.shape_));
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

Tensor Tensor::Reshaped(std::vector<int> shape) const {
  return Tensor(std::move(shape), data_);
}

double Tensor::Sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

std::string ShapeString(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

}  // namespace navseg
