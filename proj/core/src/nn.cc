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

#include "navseg/nn.h"

#include <cmath>

#include "navseg/errors.h"

namespace navseg {

Tensor& ParamStore::Add(const std::string& name, Tensor init) {
  if (Contains(name)) throw InvalidArgument("duplicate parameter " + name);
  entries_.emplace_back(name, std::move(init));
  return entries_.back().second;
}

size_t ParamStore::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == name) return i;
  }
  throw InvalidArgument("unknown parameter " + std::string(name));
}

Tensor& ParamStore::Get(std::string_view name) { return entries_[IndexOf(name)].second; }

const Tensor& ParamStore::Get(std::string_view name) const {
  return entries_[IndexOf(name)].second;
}

bool ParamStore::Contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return true;
  }
  return false;
}

size_t ParamStore::NumScalars() const {
  size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

BoundParams::BoundParams(const ParamStore& store, bool requires_grad)
    : store_(&store) {
  leaves_.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    leaves_.push_back(requires_grad ? ad::Leaf(store.tensor(i))
                                    : ad::Constant(store.tensor(i)));
  }
}

const ad::Var& BoundParams::operator[](std::string_view name) const {
  for (size_t i = 0; i < store_->size(); ++i) {
    if (store_->name(i) == name) return leaves_[i];
  }
  throw InvalidArgument("unknown parameter " + std::string(name));
}

std::vector<Tensor> BoundParams::Gradients() const {
  std::vector<Tensor> out;
  out.reserve(leaves_.size());
  for (const ad::Var& leaf : leaves_) {
    if (leaf.grad().SameShape(leaf.value())) {
      out.push_back(leaf.grad());
    } else {
      out.emplace_back(leaf.value().shape());
    }
  }
  return out;
}

void AccumulateGradients(std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.empty()) {
    a = b;
    return;
  }
  if (a.size() != b.size()) throw InvalidArgument("gradient list size mismatch");
  for (size_t i = 0; i < a.size(); ++i) a[i].AddScaled(b[i]);
}

Adam::Adam(const ParamStore& store, double learning_rate, double beta1,
           double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (size_t i = 0; i < store.size(); ++i) {
    m_.emplace_back(store.tensor(i).shape());
    v_.emplace_back(store.tensor(i).shape());
  }
}

void Adam::Step(ParamStore& store, const std::vector<Tensor>& grads) {
  if (grads.size() != store.size()) throw InvalidArgument("Adam: gradient count");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < store.size(); ++i) {
    Tensor& p = store.tensor(i);
    const Tensor& g = grads[i];
    for (size_t j = 0; j < p.size(); ++j) {
      m_[i][j] = beta1_ * m_[i][j] + (1 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1 - beta2_) * g[j] * g[j];
      p[j] -= lr_ * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps_);
    }
  }
}

Tensor HeNormal(std::vector<int> shape, int fan_in, Rng& rng, double gain) {
  Tensor t(std::move(shape));
  const double std = gain * std::sqrt(2.0 / fan_in);
  for (double& v : t.values()) v = std * StandardNormal(rng);
  return t;
}

void AddConv(ParamStore& store, const std::string& prefix, int in, int out,
             int k, Rng& rng) {
  store.Add(prefix + ".w", HeNormal({out, in, k, k}, in * k * k, rng));
  store.Add(prefix + ".b", Tensor({out}));
}

void AddLinear(ParamStore& store, const std::string& prefix, int in, int out,
               Rng& rng, double gain) {
  store.Add(prefix + ".w", HeNormal({in, out}, in, rng, gain));
  store.Add(prefix + ".b", Tensor({out}));
}

ad::Var ConvLayer(const BoundParams& p, const std::string& prefix,
                  const ad::Var& x, int stride, int pad) {
  return ad::Conv2d(x, p[prefix + ".w"], p[prefix + ".b"], stride, pad);
}

ad::Var LinearLayer(const BoundParams& p, const std::string& prefix,
                    const ad::Var& x) {
  return ad::AddRowBias(ad::MatMul(x, p[prefix + ".w"]), p[prefix + ".b"]);
}

}  // namespace navseg
