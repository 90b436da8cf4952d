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

#ifndef NAVSEG_TENSOR_H_
#define NAVSEG_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace navseg {

// Dense row-major array of doubles with a dynamic shape. Images use
// channel-first [C, H, W] layout unless stated otherwise.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor Scalar(double v) { return Tensor({1}, v); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // 2-D and 3-D element access (row-major).
  double& at(int i, int j) { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  double at(int i, int j) const { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  double& at(int c, int i, int j) {
    return data_[(static_cast<size_t>(c) * shape_[1] + i) * shape_[2] + j];
  }
  double at(int c, int i, int j) const {
    return data_[(static_cast<size_t>(c) * shape_[1] + i) * shape_[2] + j];
  }

  void Fill(double v);
  // Elementwise this += scale * other; shapes must match.
  void AddScaled(const Tensor& other, double scale = 1.0);
  Tensor Reshaped(std::vector<int> shape) const;

  double Sum() const;
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string ShapeString(const std::vector<int>& shape);

}  // namespace navseg

#endif  // NAVSEG_TENSOR_H_
