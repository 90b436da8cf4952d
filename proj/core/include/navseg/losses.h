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

#ifndef NAVSEG_LOSSES_H_
#define NAVSEG_LOSSES_H_

#include <span>

#include "navseg/autodiff.h"
#include "navseg/tensor.h"

namespace navseg::losses {

// Weights of the polyline objective; must be nonnegative and sum to 1.
struct LossWeights {
  double lambda1 = 0.425;  // structural similarity
  double lambda2 = 0.425;  // mean squared error
  double lambda3 = 0.15;   // variance prior

  void Validate() const;
};

// Mean SSIM over all fully contained box windows of side `window`.
struct SsimOptions {
  int window = 7;
  double c1 = 1e-4;  // (0.01 * range)^2, range 1
  double c2 = 9e-4;  // (0.03 * range)^2
};

double Ssim(const Tensor& a, const Tensor& b, const SsimOptions& options = {});
// d Ssim(a, b) / d b. By symmetry SsimGradient(b, a) is d/da.
Tensor SsimGradient(const Tensor& a, const Tensor& b, const SsimOptions& options = {});
ad::Var Ssim(const ad::Var& a, const ad::Var& b, const SsimOptions& options = {});

// Unweighted terms of the polyline objective.
struct Vae2LossBreakdown {
  double ssim_term = 0.0;  // (1 - SSIM) / 2
  double mse_term = 0.0;   // |L1 - R2|^2 / J
  double kl_term = 0.0;    // variance prior KL
  double total = 0.0;      // weighted sum
};

Vae2LossBreakdown Vae2Loss(const Tensor& pseudo_label, const Tensor& rendered,
                           std::span<const double> sigma2,
                           std::span<const double> epsilon2,
                           const LossWeights& weights);
// Differentiable with respect to `rendered` and `sigma2`.
ad::Var Vae2Loss(const Tensor& pseudo_label, const ad::Var& rendered,
                 const ad::Var& sigma2, std::span<const double> epsilon2,
                 const LossWeights& weights,
                 Vae2LossBreakdown* breakdown = nullptr);

constexpr double kProbabilityClamp = 1e-7;

// Mean pixelwise binary cross-entropy of a navigability probability image
// against a binary mask. Predictions are clamped to [1e-7, 1 - 1e-7].
double SupervisedLoss(const Tensor& prediction, const Tensor& gt);
ad::Var SupervisedLoss(const ad::Var& prediction, const Tensor& gt);

}  // namespace navseg::losses

#endif  // NAVSEG_LOSSES_H_
