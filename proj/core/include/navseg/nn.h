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

#ifndef NAVSEG_NN_H_
#define NAVSEG_NN_H_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "navseg/autodiff.h"
#include "navseg/rng.h"
#include "navseg/tensor.h"

namespace navseg {

// Ordered collection of named learnable tensors.
class ParamStore {
 public:
  Tensor& Add(const std::string& name, Tensor init);
  Tensor& Get(std::string_view name);
  const Tensor& Get(std::string_view name) const;
  bool Contains(std::string_view name) const;

  size_t size() const { return entries_.size(); }
  const std::string& name(size_t i) const { return entries_[i].first; }
  Tensor& tensor(size_t i) { return entries_[i].second; }
  const Tensor& tensor(size_t i) const { return entries_[i].second; }
  size_t NumScalars() const;

  bool operator==(const ParamStore& other) const = default;

 private:
  size_t IndexOf(std::string_view name) const;
  std::vector<std::pair<std::string, Tensor>> entries_;
};

// Snapshot of a ParamStore as autodiff leaves for one forward pass. The
// store is only read here, so concurrent passes over one model are safe.
class BoundParams {
 public:
  BoundParams(const ParamStore& store, bool requires_grad);

  const ad::Var& operator[](std::string_view name) const;
  // Gradients in store order (zeros for parameters the graph did not use).
  std::vector<Tensor> Gradients() const;

 private:
  const ParamStore* store_;
  std::vector<ad::Var> leaves_;
};

// Adds b into a elementwise (same layout).
void AccumulateGradients(std::vector<Tensor>& a, const std::vector<Tensor>& b);

// Adaptive-moment first-order optimizer.
class Adam {
 public:
  explicit Adam(const ParamStore& store, double learning_rate,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void Step(ParamStore& store, const std::vector<Tensor>& grads);
  void set_learning_rate(double lr) { lr_ = lr; }
  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

// He-normal initialized tensor with the given fan-in.
Tensor HeNormal(std::vector<int> shape, int fan_in, Rng& rng, double gain = 1.0);

// Adds `<prefix>.w` [out, in, k, k] and `<prefix>.b` [out].
void AddConv(ParamStore& store, const std::string& prefix, int in, int out,
             int k, Rng& rng);
// Adds `<prefix>.w` [in, out] and `<prefix>.b` [out].
void AddLinear(ParamStore& store, const std::string& prefix, int in, int out,
               Rng& rng, double gain = 1.0);

ad::Var ConvLayer(const BoundParams& p, const std::string& prefix,
                  const ad::Var& x, int stride, int pad);
ad::Var LinearLayer(const BoundParams& p, const std::string& prefix,
                    const ad::Var& x);

}  // namespace navseg

#endif  // NAVSEG_NN_H_
