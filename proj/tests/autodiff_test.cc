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

#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "navseg/autodiff.h"
#include "navseg/rng.h"
#include "test_util.h"

namespace navseg {
namespace {

using ad::Var;
using Fn = std::function<Var(const std::vector<Var>&)>;

Tensor RandomTensor(std::vector<int> shape, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng = MakeRng({seed});
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = UniformIn(rng, lo, hi);
  return t;
}

// Scalarizes an output with fixed random weights so every output element
// contributes a distinct gradient.
Var Weighted(const Var& out, uint64_t seed) {
  return ad::Sum(ad::MulConstant(out, RandomTensor(out.shape(), seed)));
}

// Compares reverse-mode gradients of `fn` against central differences for
// every input element.
void ExpectGradientsMatch(const Fn& fn, std::vector<Tensor> inputs, double step = 1e-5,
                          double tol = 1e-6) {
  std::vector<Var> leaves;
  for (const Tensor& t : inputs) leaves.push_back(ad::Leaf(t));
  const Var out = fn(leaves);
  ASSERT_EQ(out.value().size(), 1u);
  ad::Backward(out);
  for (size_t k = 0; k < inputs.size(); ++k) {
    for (size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Var> shifted;
        for (size_t j = 0; j < inputs.size(); ++j) {
          Tensor t = inputs[j];
          if (j == k) t[i] += delta;
          shifted.push_back(ad::Constant(t));
        }
        return fn(shifted).value()[0];
      };
      const double numeric = (eval(step) - eval(-step)) / (2.0 * step);
      const double analytic = leaves[k].node()->Grad()[i];
      ASSERT_LT(testing::RelativeError(analytic, numeric, 1e-4), tol)
          << "input " << k << " element " << i << ": analytic " << analytic << " numeric "
          << numeric;
    }
  }
}

TEST(AutodiffTest, ElementwiseOps) {
  const Tensor a = RandomTensor({5}, 1, 0.2, 2.0), b = RandomTensor({5}, 2, 0.2, 2.0);
  ExpectGradientsMatch(
      [](const std::vector<Var>& v) {
        Var x = ad::Add(ad::Mul(v[0], v[1]), ad::Sub(v[0], ad::Scale(v[1], 0.3)));
        x = ad::Add(x, ad::Log(v[0]));
        x = ad::Add(x, ad::Sqrt(v[1]));
        x = ad::Add(x, ad::Exp(ad::Scale(v[0], 0.5)));
        x = ad::Add(x, ad::Square(v[1]));
        x = ad::Add(x, ad::Softplus(ad::AddConstant(v[0], Tensor({5}, -1.0))));
        x = ad::Add(x, ad::Elu(ad::AddConstant(v[1], Tensor({5}, -1.0))));
        return Weighted(x, 3);
      },
      {a, b});
}

TEST(AutodiffTest, Reductions) {
  const Tensor a = RandomTensor({2, 3}, 4);
  const Tensor target = RandomTensor({2, 3}, 5);
  ExpectGradientsMatch(
      [&](const std::vector<Var>& v) {
        return ad::Add(ad::Mean(ad::Square(v[0])), ad::SquaredDistance(v[0], target));
      },
      {a});
}

// Direct 4-loop convolution used as an independent forward oracle.
Tensor NaiveConv(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int c_in = x.dim(0), h = x.dim(1), wd = x.dim(2), c_out = w.dim(0), k = w.dim(2);
  const int ho = (h + 2 * pad - k) / stride + 1, wo = (wd + 2 * pad - k) / stride + 1;
  Tensor out({c_out, ho, wo});
  for (int o = 0; o < c_out; ++o) {
    for (int i = 0; i < ho; ++i) {
      for (int j = 0; j < wo; ++j) {
        double s = b[o];
        for (int c = 0; c < c_in; ++c) {
          for (int di = 0; di < k; ++di) {
            for (int dj = 0; dj < k; ++dj) {
              const int y = i * stride - pad + di, xx = j * stride - pad + dj;
              if (y < 0 || y >= h || xx < 0 || xx >= wd) continue;
              s += w[((static_cast<size_t>(o) * c_in + c) * k + di) * k + dj] * x.at(c, y, xx);
            }
          }
        }
        out.at(o, i, j) = s;
      }
    }
  }
  return out;
}

TEST(AutodiffTest, ConvMatchesDirectLoops) {
  const Tensor x = RandomTensor({2, 7, 6}, 6);
  const Tensor w = RandomTensor({3, 2, 3, 3}, 7);
  const Tensor b = RandomTensor({3}, 8);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      const Var y = ad::Conv2d(ad::Constant(x), ad::Constant(w), ad::Constant(b), stride, pad);
      const Tensor ref = NaiveConv(x, w, b, stride, pad);
      ASSERT_EQ(y.shape(), ref.shape());
      for (size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.value()[i], ref[i], 1e-12);
    }
  }
}

TEST(AutodiffTest, ConvGradients) {
  for (int stride : {1, 2}) {
    ExpectGradientsMatch(
        [stride](const std::vector<Var>& v) {
          return Weighted(ad::Conv2d(v[0], v[1], v[2], stride, 1), 9);
        },
        {RandomTensor({2, 5, 6}, 10), RandomTensor({2, 2, 3, 3}, 11), RandomTensor({2}, 12)});
  }
}

TEST(AutodiffTest, SoftmaxChannelAndColumnOps) {
  const Tensor x = RandomTensor({3, 4, 5}, 13, -2.0, 2.0);
  const Var s = ad::SoftmaxChannels(ad::Constant(x));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      double total = 0.0;
      for (int c = 0; c < 3; ++c) total += s.value().at(c, i, j);
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
  ExpectGradientsMatch(
      [](const std::vector<Var>& v) {
        return ad::Add(Weighted(ad::Channel(ad::SoftmaxChannels(v[0]), 1), 14),
                       Weighted(ad::ColumnMean(v[0]), 15));
      },
      {x});
}

TEST(AutodiffTest, SamplingOps) {
  const Tensor x = RandomTensor({2, 5, 7}, 16);
  // Points avoid integer coordinates where bilinear weights have kinks.
  const std::vector<ad::Point> points = {{0.3, 0.6}, {3.7, 2.2}, {6.0 - 0.25, 4.0 - 0.4}};
  const std::vector<double> columns = {0.1, 2.5, 5.9};
  ExpectGradientsMatch(
      [&](const std::vector<Var>& v) {
        return ad::Add(Weighted(ad::SampleBilinear(v[0], points), 17),
                       Weighted(ad::SampleColumns(ad::ColumnMean(v[0]), columns), 18));
      },
      {x});
  // A sample exactly on a pixel centre returns that pixel.
  const std::vector<ad::Point> centre = {{3.0, 2.0}};
  const Var s = ad::SampleBilinear(ad::Constant(x), centre);
  EXPECT_DOUBLE_EQ(s.value()[0], x.at(0, 2, 3));
  EXPECT_DOUBLE_EQ(s.value()[1], x.at(1, 2, 3));
}

TEST(AutodiffTest, GraphOps) {
  ExpectGradientsMatch(
      [](const std::vector<Var>& v) {
        const Var h = ad::ConcatColumns({v[0], v[1]});
        const Var y = ad::AddRowBias(ad::MatMul(h, v[2]), v[3]);
        return ad::Add(Weighted(ad::ChainNeighborSum(y), 19), Weighted(ad::Column(y, 1), 20));
      },
      {RandomTensor({4, 2}, 21), RandomTensor({4, 3}, 22), RandomTensor({5, 3}, 23),
       RandomTensor({3}, 24)});
}

TEST(AutodiffTest, ChainNeighborSumIsZeroPaddedAtEnds) {
  const Tensor h({3, 1}, std::vector<double>{1.0, 10.0, 100.0});
  const Var y = ad::ChainNeighborSum(ad::Constant(h));
  EXPECT_EQ(y.value()[0], 10.0);
  EXPECT_EQ(y.value()[1], 101.0);
  EXPECT_EQ(y.value()[2], 10.0);
}

TEST(AutodiffTest, SharedSubexpressionAccumulates) {
  const Var x = ad::Leaf(Tensor::Scalar(3.0));
  const Var y = ad::Mul(x, x);
  ad::Backward(ad::Add(y, y));
  EXPECT_DOUBLE_EQ(x.node()->Grad()[0], 12.0);
}

}  // namespace
}  // namespace navseg
