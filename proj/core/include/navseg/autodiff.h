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

// Minimal tape-free reverse-mode automatic differentiation over Tensor.
//
// Every operation returns a Var that owns its value and a closure that
// propagates the node's gradient into its inputs. Graphs are built per
// forward pass and released with their last Var; parameters enter as leaves
// (see nn.h). Backward() must be called on a single-element Var.
#ifndef NAVSEG_AUTODIFF_H_
#define NAVSEG_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "navseg/tensor.h"

namespace navseg::ad {

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Gradient buffer, allocated as zeros on first use.
  Tensor& Grad();
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::vector<int>& shape() const { return node_->value.shape(); }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

Var Constant(Tensor value);
Var Leaf(Tensor value);

// Builds an operation node. `backward` runs only when at least one input
// requires a gradient; it reads node.grad and accumulates into the inputs'
// Grad() buffers (skipping inputs that do not require grad).
Var MakeOp(Tensor value, std::vector<Var> inputs,
           std::function<void(Node&)> backward);

// Seeds d(root)/d(root) = 1 and propagates in reverse topological order.
void Backward(const Var& root);

// Elementwise (shapes must match).
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double s);
Var AddConstant(const Var& a, const Tensor& c);
Var MulConstant(const Var& a, const Tensor& c);
Var Exp(const Var& a);
Var Log(const Var& a);
Var Sqrt(const Var& a);
Var Square(const Var& a);
Var Softplus(const Var& a);
Var Elu(const Var& a);

// Reductions to shape [1].
Var Sum(const Var& a);
Var Mean(const Var& a);
// sum((a - target)^2).
Var SquaredDistance(const Var& a, const Tensor& target);

// x: [C, H, W], w: [O, C, k, k], b: [O] -> [O, H', W'].
Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
// Softmax over the channel axis of [C, H, W].
Var SoftmaxChannels(const Var& x);
// Channel c of [C, H, W] -> [H, W].
Var Channel(const Var& x, int c);
// [C, H, W] -> [C, W], mean over rows.
Var ColumnMean(const Var& x);

struct Point {
  double x;
  double y;
};
// Bilinear samples of [C, H, W] at points given in that tensor's pixel
// coordinates (border-clamped) -> [N, C].
Var SampleBilinear(const Var& x, std::span<const Point> points);
// Linear samples of [C, W] at fractional columns (border-clamped) -> [N, C].
Var SampleColumns(const Var& x, std::span<const double> columns);

// [N, Ci]... -> [N, sum Ci].
Var ConcatColumns(const std::vector<Var>& parts);
// [N, D] x [D, E] -> [N, E].
Var MatMul(const Var& a, const Var& w);
// [N, E] + [E] broadcast over rows.
Var AddRowBias(const Var& a, const Var& bias);
// Row i <- row(i-1) + row(i+1), zero beyond the ends of the chain.
Var ChainNeighborSum(const Var& h);
// Column j of [N, E] -> [N].
Var Column(const Var& a, int j);

}  // namespace navseg::ad

#endif  // NAVSEG_AUTODIFF_H_
