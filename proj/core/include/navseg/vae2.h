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

// Boundary-polyline VAE: predicts a 1-D Gaussian over the row of each of N
// vertices at fixed, evenly spaced columns.
//
// Encoder: a three-level convolutional feature pyramid (strides 1, 2, 4).
// Each vertex gathers bilinear samples of every level at its initial
// position plus the column-mean of every level at its column, and its
// normalized coordinates. A chain graph convolution (neighbors are adjacent
// vertices, with a separate self weight) with residual layers refines these
// node features into (offset, raw variance) per vertex.
#ifndef NAVSEG_VAE2_H_
#define NAVSEG_VAE2_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "navseg/autodiff.h"
#include "navseg/checkpoint.h"
#include "navseg/nn.h"

namespace navseg::vae2 {

struct PolylineDistribution {
  std::vector<double> xs;
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<double> init_ys;

  size_t size() const { return xs.size(); }
  // Throws InvalidArgument on a violated invariant.
  void Validate(int width) const;
};

struct PriorSpec {
  std::vector<double> categorical_prior;  // per latent class
  std::vector<double> epsilon2;           // per vertex, pixels^2

  static PriorSpec Uniform(int classes, int vertices, double epsilon);
  void Validate() const;
};

struct Vae2Config {
  int height = 64;
  int width = 96;
  int vertices = 16;
  int channels = 8;
  int gcn_layers = 6;
  int gcn_hidden = 32;
  double init_y = -1.0;        // < 0 means height / 2
  double offset_scale = 16.0;  // pixels per unit of the offset head
  double init_sigma2 = 4.0;    // initial variance the head is biased towards

  double InitialRow() const { return init_y < 0 ? 0.5 * height : init_y; }
  KeyValueList ToKeyValues() const;
  static Vae2Config FromKeyValues(const KeyValueList& kv);
};

class Vae2Model {
 public:
  Vae2Model(const Vae2Config& config, uint64_t seed);

  static Vae2Model FromCheckpoint(const Checkpoint& ckpt);
  Checkpoint ToCheckpoint(const KeyValueList& extra_config) const;

  const Vae2Config& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::vector<double> Columns() const;
  std::vector<double> InitialRows() const;
  // Columns of the input that can influence one vertex's node features.
  int FeatureColumnRadius() const { return 9; }

 private:
  Vae2Model(const Vae2Config& config, ParamStore params);

  Vae2Config config_;
  ParamStore params_;
};

struct Vae2Graph {
  ad::Var mu;      // [N]
  ad::Var sigma2;  // [N]
};

// image: [3, H, W].
Vae2Graph ForwardGraph(const BoundParams& p, const Vae2Config& config,
                       const ad::Var& image, std::span<const double> xs,
                       std::span<const double> init_ys);

PolylineDistribution Forward(const Vae2Model& model, const Tensor& image);
// Forward with explicit initial rows (N = init_ys.size() >= 2 vertices).
PolylineDistribution Forward(const Vae2Model& model, const Tensor& image,
                             std::span<const double> init_ys);

constexpr double kVarianceFloor = 1e-8;

// y_i = mu_i + sqrt(max(sigma2_i, floor)) * eta_i, eta ~ N(0, 1).
std::vector<double> ReparameterizeSample(const PolylineDistribution& dist,
                                         uint64_t seed);
ad::Var ReparameterizeSample(const ad::Var& mu, const ad::Var& sigma2,
                             uint64_t seed);
std::vector<double> StandardNormals(size_t n, uint64_t seed);

// Mean over vertices of KL(N(mu, sigma2_i) || N(mu, epsilon2_i)):
//   (1/N) sum log(eps_i) - log(sigma_i) + (sigma_i^2 - eps_i^2) / (2 eps_i^2)
double GaussianPriorKl(std::span<const double> sigma2,
                       std::span<const double> epsilon2);
ad::Var GaussianPriorKl(const ad::Var& sigma2, std::span<const double> epsilon2);

// One line per vertex: "<x> <mu> <sigma2>".
void WritePolyline(const std::filesystem::path& path,
                   const PolylineDistribution& dist);

}  // namespace navseg::vae2

#endif  // NAVSEG_VAE2_H_
