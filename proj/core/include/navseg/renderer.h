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

// Differentiable rendering of a boundary polyline into a navigability mask.
//
// The polyline vertices (xs[i], ys[i]) together with their projections onto
// the image bottom edge form a strip of quads, each split into two
// triangles. Because the boundary is a function of the column, the area
// that strip covers in column u is exactly the rows below b(u), the linear
// interpolation of the vertices. Rendering that coverage with a logistic
// edge of width `sharpness` gives
//
//   values(v, u) = logistic((v + 0.5 - b(u)) / sharpness)
//
// which is used directly, with exact gradients with respect to ys.
#ifndef NAVSEG_RENDERER_H_
#define NAVSEG_RENDERER_H_

#include <span>
#include <vector>

#include "navseg/autodiff.h"
#include "navseg/tensor.h"

namespace navseg::render {

struct RenderedMask {
  Tensor values;  // [H, W] in [0, 1]
  double sharpness = 1.0;
};

// N evenly spaced columns spanning [0, width - 1].
std::vector<double> EvenColumns(int n, int width);

// b(u) for u = 0..width-1. Throws InvalidArgument unless xs is strictly
// increasing from 0 to width - 1 and ys has the same length.
std::vector<double> BoundaryRows(std::span<const double> ys,
                                 std::span<const double> xs, int width);

RenderedMask SoftRasterize(std::span<const double> ys,
                           std::span<const double> xs, int height, int width,
                           double sharpness);

// d(loss)/d(ys) given d(loss)/d(values).
std::vector<double> SoftRasterizeBackward(const Tensor& grad_values,
                                          std::span<const double> ys,
                                          std::span<const double> xs,
                                          int height, int width,
                                          double sharpness);

// mask(v, u) = 1 iff v + 0.5 > b(u).
Tensor HardRasterize(std::span<const double> ys, std::span<const double> xs,
                     int height, int width);

// Autodiff form; ys is a [N] Var.
ad::Var SoftRasterize(const ad::Var& ys, std::span<const double> xs,
                      int height, int width, double sharpness);

}  // namespace navseg::render

#endif  // NAVSEG_RENDERER_H_
