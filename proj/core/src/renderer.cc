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

#include "navseg/renderer.h"

#include <cmath>
#include <string>

#include "navseg/errors.h"

namespace navseg::render {
namespace {

struct ColumnWeight {
  int k;        // left vertex
  double t;     // weight of vertex k + 1
};

std::vector<ColumnWeight> ColumnWeights(std::span<const double> xs, int width) {
  const size_t n = xs.size();
  if (n < 2) throw InvalidArgument("polyline needs at least 2 vertices");
  if (xs.front() != 0.0 || xs.back() != static_cast<double>(width - 1)) {
    throw InvalidArgument("polyline must span columns 0.." + std::to_string(width - 1));
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidArgument("polyline xs must be strictly increasing");
  }
  std::vector<ColumnWeight> out(static_cast<size_t>(width));
  size_t k = 0;
  for (int u = 0; u < width; ++u) {
    while (k + 2 < n && u > xs[k + 1]) ++k;
    out[u] = {static_cast<int>(k), (u - xs[k]) / (xs[k + 1] - xs[k])};
  }
  return out;
}

double Logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void CheckArgs(std::span<const double> ys, std::span<const double> xs,
               int height, int width) {
  if (ys.size() != xs.size()) throw InvalidArgument("ys and xs differ in length");
  if (height < 1 || width < 2) throw InvalidArgument("render target too small");
}

}  // namespace

std::vector<double> EvenColumns(int n, int width) {
  if (n < 2) throw InvalidArgument("need at least 2 columns");
  std::vector<double> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) xs[i] = static_cast<double>(i) * (width - 1) / (n - 1);
  xs.back() = width - 1;
  return xs;
}

std::vector<double> BoundaryRows(std::span<const double> ys,
                                 std::span<const double> xs, int width) {
  if (ys.size() != xs.size()) throw InvalidArgument("ys and xs differ in length");
  const auto weights = ColumnWeights(xs, width);
  std::vector<double> b(static_cast<size_t>(width));
  for (int u = 0; u < width; ++u) {
    const auto [k, t] = weights[u];
    b[u] = (1 - t) * ys[k] + t * ys[k + 1];
  }
  return b;
}

RenderedMask SoftRasterize(std::span<const double> ys,
                           std::span<const double> xs, int height, int width,
                           double sharpness) {
  CheckArgs(ys, xs, height, width);
  if (!(sharpness > 0)) throw InvalidArgument("sharpness must be positive");
  const std::vector<double> b = BoundaryRows(ys, xs, width);
  RenderedMask out{Tensor({height, width}), sharpness};
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      out.values.at(v, u) = Logistic((v + 0.5 - b[u]) / sharpness);
    }
  }
  return out;
}

std::vector<double> SoftRasterizeBackward(const Tensor& grad_values,
                                          std::span<const double> ys,
                                          std::span<const double> xs,
                                          int height, int width,
                                          double sharpness) {
  CheckArgs(ys, xs, height, width);
  const auto weights = ColumnWeights(xs, width);
  const std::vector<double> b = BoundaryRows(ys, xs, width);
  std::vector<double> grad(ys.size(), 0.0);
  for (int u = 0; u < width; ++u) {
    double db = 0.0;
    for (int v = 0; v < height; ++v) {
      const double s = Logistic((v + 0.5 - b[u]) / sharpness);
      db -= grad_values.at(v, u) * s * (1 - s) / sharpness;
    }
    const auto [k, t] = weights[u];
    grad[k] += (1 - t) * db;
    grad[k + 1] += t * db;
  }
  return grad;
}

Tensor HardRasterize(std::span<const double> ys, std::span<const double> xs,
                     int height, int width) {
  CheckArgs(ys, xs, height, width);
  const std::vector<double> b = BoundaryRows(ys, xs, width);
  Tensor mask({height, width});
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) mask.at(v, u) = (v + 0.5 > b[u]) ? 1.0 : 0.0;
  }
  return mask;
}

ad::Var SoftRasterize(const ad::Var& ys, std::span<const double> xs,
                      int height, int width, double sharpness) {
  const Tensor& y = ys.value();
  std::vector<double> cols(xs.begin(), xs.end());
  RenderedMask m = SoftRasterize(y.values(), cols, height, width, sharpness);
  return ad::MakeOp(std::move(m.values), {ys}, [cols, height, width, sharpness](ad::Node& n) {
    ad::Node& in = *n.inputs[0];
    const std::vector<double> g =
        SoftRasterizeBackward(n.grad, in.value.values(), cols, height, width, sharpness);
    Tensor& gy = in.Grad();
    for (size_t i = 0; i < g.size(); ++i) gy[i] += g[i];
  });
}

}  // namespace navseg::render
