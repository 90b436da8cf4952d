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

// Categorical-latent VAE over surface-normal images.
//
// The encoder maps a [3, H, W] normal image to per-pixel class logits; a
// Gumbel-Softmax relaxed sample of the latent classes is decoded back to a
// normal image. The decoder likelihood is an isotropic Gaussian with one
// learned variance, stored as `log_sigma2` and kept within [1e-3, 10].
#ifndef NAVSEG_VAE1_H_
#define NAVSEG_VAE1_H_

#include <cstdint>
#include <span>
#include <vector>

#include "navseg/autodiff.h"
#include "navseg/checkpoint.h"
#include "navseg/nn.h"

namespace navseg::vae1 {

struct Vae1Config {
  int height = 64;
  int width = 96;
  int classes = 2;
  int hidden = 8;

  KeyValueList ToKeyValues() const;
  static Vae1Config FromKeyValues(const KeyValueList& kv);
};

constexpr double kMinSigma2 = 1e-3;
constexpr double kMaxSigma2 = 10.0;

class Vae1Model {
 public:
  Vae1Model(const Vae1Config& config, uint64_t seed);

  static Vae1Model FromCheckpoint(const Checkpoint& ckpt);
  Checkpoint ToCheckpoint(const KeyValueList& extra_config) const;

  const Vae1Config& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  double sigma2() const;
  // Projects log_sigma2 back into its admissible range.
  void ProjectParameters();

 private:
  Vae1Model(const Vae1Config& config, ParamStore params);

  Vae1Config config_;
  ParamStore params_;
};

// q(z | x): logits and their per-pixel softmax, both [C, H, W].
struct CategoricalLatentMap {
  Tensor logits;
  Tensor probs;
};

struct PseudoLabelImage {
  Tensor values;  // [H, W], probability of the navigable class
  int navigable_channel = 0;
  bool degenerate = false;  // tie in the channel-selection rule
};

struct Vae1Forward {
  CategoricalLatentMap q;
  Tensor z;               // relaxed sample [C, H, W]
  Tensor reconstruction;  // [3, H, W]
};

ad::Var EncoderLogits(const BoundParams& p, const Vae1Config& config,
                      const ad::Var& image);
ad::Var Decode(const BoundParams& p, const ad::Var& z);

Vae1Forward Forward(const Vae1Model& model, const Tensor& image, double tau,
                    uint64_t seed);
CategoricalLatentMap Posterior(const Vae1Model& model, const Tensor& image);

// Standard Gumbel noise with the given shape.
Tensor GumbelNoise(const std::vector<int>& shape, uint64_t seed);
// softmax((logits + g) / tau) over the channel axis of [C, H, W].
Tensor GumbelSoftmaxSample(const Tensor& logits, double tau, uint64_t seed);
ad::Var GumbelSoftmax(const ad::Var& logits, double tau, uint64_t seed);

// sum over pixels and classes of q log(q / prior), with 0 log 0 = 0.
double CategoricalKl(const CategoricalLatentMap& q, std::span<const double> prior);
// Same quantity computed stably from logits, differentiable.
ad::Var CategoricalKl(const ad::Var& logits, std::span<const double> prior);

struct Vae1LossBreakdown {
  double kl = 0.0;
  double recon = 0.0;   // sum_i (1 / (2 K sigma2)) sum_k |x_i - xhat_ik|^2
  double logvar = 0.0;  // sum_i (J / 2) log sigma2
  double supervised = 0.0;
  double total = 0.0;
};

struct Vae1LossOptions {
  int samples = 1;  // K
  double tau = 1.0;
  std::vector<double> prior = {0.5, 0.5};
  uint64_t seed = 0;
  // Optional per-image supervision: gt[i] null for unlabeled images.
  std::vector<const Tensor*> gt;
  double lambda_sup = 1.0;
};

// Negative ELBO summed over the batch (plus optional supervised terms on
// the channel-1 probabilities). Differentiable through `p`.
ad::Var Vae1LossGraph(const BoundParams& p, const Vae1Config& config,
                      std::span<const Tensor> images,
                      const Vae1LossOptions& options,
                      Vae1LossBreakdown* breakdown = nullptr);
Vae1LossBreakdown Vae1Loss(const Vae1Model& model, std::span<const Tensor> images,
                           const Vae1LossOptions& options);

// Chooses as navigable the class with the higher mean probability over the
// bottom 20% of rows; a tie selects channel 0 and sets `degenerate`.
PseudoLabelImage PseudoLabel(const CategoricalLatentMap& q);

}  // namespace navseg::vae1

#endif  // NAVSEG_VAE1_H_
