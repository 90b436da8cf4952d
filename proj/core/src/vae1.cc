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

#include "navseg/vae1.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "navseg/errors.h"
#include "navseg/kv.h"
#include "navseg/losses.h"
#include "navseg/rng.h"

namespace navseg::vae1 {
namespace {

void CheckImage(const Vae1Config& config, const Tensor& image) {
  if (image.shape() != std::vector<int>{3, config.height, config.width}) {
    throw InvalidArgument("vae1: image shape " + ShapeString(image.shape()) +
                          " does not match model " + std::to_string(config.height) +
                          "x" + std::to_string(config.width));
  }
}

void CheckPrior(std::span<const double> prior, int classes) {
  if (static_cast<int>(prior.size()) != classes) {
    throw InvalidArgument("prior has " + std::to_string(prior.size()) + " classes, expected " +
                          std::to_string(classes));
  }
  double total = 0.0;
  for (double p : prior) {
    if (!(p > 0)) throw InvalidArgument("categorical prior must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("categorical prior must sum to 1");
}

}  // namespace

KeyValueList Vae1Config::ToKeyValues() const {
  return {{"height", std::to_string(height)},
          {"width", std::to_string(width)},
          {"classes", std::to_string(classes)},
          {"hidden", std::to_string(hidden)}};
}

Vae1Config Vae1Config::FromKeyValues(const KeyValueList& kv) {
  auto need = [&](const std::string& key) {
    const std::string* v = FindValue(kv, key);
    if (!v) throw ConfigError("vae1 config missing '" + key + "'");
    return static_cast<int>(ParseIntValue(*v, key));
  };
  return {need("height"), need("width"), need("classes"), need("hidden")};
}

Vae1Model::Vae1Model(const Vae1Config& config, uint64_t seed) : config_(config) {
  if (config.classes < 2) throw InvalidArgument("vae1 needs at least 2 classes");
  Rng rng = MakeRng({seed, 0x7AE1});
  const int h = config.hidden;
  AddConv(params_, "enc0", 3, h, 3, rng);
  AddConv(params_, "enc1", h, h, 3, rng);
  AddConv(params_, "enc2", h, config.classes, 1, rng);
  AddConv(params_, "dec0", config.classes, h, 3, rng);
  AddConv(params_, "dec1", h, 3, 1, rng);
  params_.Add("log_sigma2", Tensor({1}, 0.0));
}

Vae1Model::Vae1Model(const Vae1Config& config, ParamStore params)
    : config_(config), params_(std::move(params)) {}

Vae1Model Vae1Model::FromCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "vae1") throw ConfigError("checkpoint kind is '" + ckpt.kind + "', expected vae1");
  const Vae1Config config = Vae1Config::FromKeyValues(ckpt.config);
  const Vae1Model reference(config, 0);
  for (size_t i = 0; i < reference.params_.size(); ++i) {
    const std::string& name = reference.params_.name(i);
    if (!ckpt.params.Contains(name) ||
        ckpt.params.Get(name).shape() != reference.params_.tensor(i).shape()) {
      throw ConfigError("vae1 checkpoint parameter '" + name + "' missing or mis-shaped");
    }
  }
  return Vae1Model(config, ckpt.params);
}

Checkpoint Vae1Model::ToCheckpoint(const KeyValueList& extra_config) const {
  Checkpoint ckpt;
  ckpt.kind = "vae1";
  ckpt.provenance = BuildProvenance();
  ckpt.config = config_.ToKeyValues();
  ckpt.config.insert(ckpt.config.end(), extra_config.begin(), extra_config.end());
  ckpt.params = params_;
  return ckpt;
}

double Vae1Model::sigma2() const { return std::exp(params_.Get("log_sigma2")[0]); }

void Vae1Model::ProjectParameters() {
  double& ls = params_.Get("log_sigma2")[0];
  ls = std::clamp(ls, std::log(kMinSigma2), std::log(kMaxSigma2));
}

ad::Var EncoderLogits(const BoundParams& p, const Vae1Config& config,
                      const ad::Var& image) {
  CheckImage(config, image.value());
  ad::Var h = ad::Elu(ConvLayer(p, "enc0", image, 1, 1));
  h = ad::Elu(ConvLayer(p, "enc1", h, 1, 1));
  return ConvLayer(p, "enc2", h, 1, 0);
}

ad::Var Decode(const BoundParams& p, const ad::Var& z) {
  const ad::Var h = ad::Elu(ConvLayer(p, "dec0", z, 1, 1));
  return ConvLayer(p, "dec1", h, 1, 0);
}

Tensor GumbelNoise(const std::vector<int>& shape, uint64_t seed) {
  Rng rng = MakeRng({seed, 0x6E11});
  Tensor g(shape);
  for (double& v : g.values()) v = StandardGumbel(rng);
  return g;
}

ad::Var GumbelSoftmax(const ad::Var& logits, double tau, uint64_t seed) {
  if (!(tau > 0)) throw InvalidArgument("Gumbel-Softmax temperature must be positive");
  if (logits.value().rank() != 3) throw InvalidArgument("Gumbel-Softmax expects [C, H, W]");
  const Tensor noise = GumbelNoise(logits.shape(), seed);
  return ad::SoftmaxChannels(ad::Scale(ad::AddConstant(logits, noise), 1.0 / tau));
}

Tensor GumbelSoftmaxSample(const Tensor& logits, double tau, uint64_t seed) {
  return GumbelSoftmax(ad::Constant(logits), tau, seed).value();
}

Vae1Forward Forward(const Vae1Model& model, const Tensor& image, double tau,
                    uint64_t seed) {
  const BoundParams p(model.params(), false);
  const ad::Var logits = EncoderLogits(p, model.config(), ad::Constant(image));
  const ad::Var z = GumbelSoftmax(logits, tau, seed);
  Vae1Forward out;
  out.q.logits = logits.value();
  out.q.probs = ad::SoftmaxChannels(logits).value();
  out.z = z.value();
  out.reconstruction = Decode(p, z).value();
  return out;
}

CategoricalLatentMap Posterior(const Vae1Model& model, const Tensor& image) {
  const BoundParams p(model.params(), false);
  const ad::Var logits = EncoderLogits(p, model.config(), ad::Constant(image));
  return {logits.value(), ad::SoftmaxChannels(logits).value()};
}

double CategoricalKl(const CategoricalLatentMap& q, std::span<const double> prior) {
  const Tensor& probs = q.probs;
  if (probs.rank() != 3) throw InvalidArgument("CategoricalKl expects [C, H, W] probabilities");
  CheckPrior(prior, probs.dim(0));
  const size_t plane = static_cast<size_t>(probs.dim(1)) * probs.dim(2);
  double total = 0.0;
  for (int c = 0; c < probs.dim(0); ++c) {
    for (size_t i = 0; i < plane; ++i) {
      const double v = probs[c * plane + i];
      if (v > 0) total += v * std::log(v / prior[c]);
    }
  }
  return total;
}

ad::Var CategoricalKl(const ad::Var& logits, std::span<const double> prior) {
  const Tensor& l = logits.value();
  if (l.rank() != 3) throw InvalidArgument("CategoricalKl expects [C, H, W] logits");
  const int c_n = l.dim(0);
  CheckPrior(prior, c_n);
  const size_t plane = static_cast<size_t>(l.dim(1)) * l.dim(2);
  // Keep q and a = log q - log prior per entry for the backward pass.
  Tensor q(l.shape()), a(l.shape());
  double total = 0.0;
  for (size_t i = 0; i < plane; ++i) {
    double mx = l[i];
    for (int c = 1; c < c_n; ++c) mx = std::max(mx, l[c * plane + i]);
    double z = 0.0;
    for (int c = 0; c < c_n; ++c) z += std::exp(l[c * plane + i] - mx);
    const double lse = mx + std::log(z);
    for (int c = 0; c < c_n; ++c) {
      const size_t j = c * plane + i;
      const double log_q = l[j] - lse;
      q[j] = std::exp(log_q);
      a[j] = log_q - std::log(prior[c]);
      total += q[j] * a[j];
    }
  }
  return ad::MakeOp(Tensor::Scalar(total), {logits}, [q, a, c_n, plane](ad::Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    const double g0 = n.grad[0];
    for (size_t i = 0; i < plane; ++i) {
      double mean_a = 0.0;
      for (int c = 0; c < c_n; ++c) mean_a += q[c * plane + i] * a[c * plane + i];
      for (int c = 0; c < c_n; ++c) {
        const size_t j = c * plane + i;
        g[j] += g0 * q[j] * (a[j] - mean_a);
      }
    }
  });
}

ad::Var Vae1LossGraph(const BoundParams& p, const Vae1Config& config,
                      std::span<const Tensor> images,
                      const Vae1LossOptions& options,
                      Vae1LossBreakdown* breakdown) {
  if (options.samples < 1) throw InvalidArgument("vae1 loss needs K >= 1 samples");
  if (images.empty()) throw InvalidArgument("vae1 loss needs a non-empty batch");
  if (!options.gt.empty() && options.gt.size() != images.size()) {
    throw InvalidArgument("vae1 loss: gt list must match the batch");
  }
  const double pixels = static_cast<double>(config.height) * config.width;
  const ad::Var& log_sigma2 = p["log_sigma2"];
  const ad::Var inv_sigma2 = ad::Exp(ad::Scale(log_sigma2, -1.0));

  Vae1LossBreakdown parts;
  ad::Var total;
  for (size_t i = 0; i < images.size(); ++i) {
    const ad::Var logits = EncoderLogits(p, config, ad::Constant(images[i]));
    const ad::Var kl = CategoricalKl(logits, options.prior);
    ad::Var sq;
    for (int k = 0; k < options.samples; ++k) {
      const ad::Var z = GumbelSoftmax(logits, options.tau, DeriveSeed({options.seed, i, static_cast<uint64_t>(k)}));
      const ad::Var d = ad::SquaredDistance(Decode(p, z), images[i]);
      sq = sq ? ad::Add(sq, d) : d;
    }
    const ad::Var recon = ad::Mul(inv_sigma2, ad::Scale(sq, 0.5 / options.samples));
    const ad::Var logvar = ad::Scale(log_sigma2, 0.5 * pixels);
    ad::Var image_loss = ad::Add(ad::Add(kl, recon), logvar);
    parts.kl += kl.value()[0];
    parts.recon += recon.value()[0];
    parts.logvar += logvar.value()[0];
    if (!options.gt.empty() && options.gt[i] != nullptr) {
      const ad::Var probs = ad::SoftmaxChannels(logits);
      const ad::Var sup = ad::Scale(losses::SupervisedLoss(ad::Channel(probs, 1), *options.gt[i]),
                                    options.lambda_sup);
      parts.supervised += sup.value()[0];
      image_loss = ad::Add(image_loss, sup);
    }
    total = total ? ad::Add(total, image_loss) : image_loss;
  }
  parts.total = total.value()[0];
  if (breakdown) *breakdown = parts;
  return total;
}

Vae1LossBreakdown Vae1Loss(const Vae1Model& model, std::span<const Tensor> images,
                           const Vae1LossOptions& options) {
  const BoundParams p(model.params(), false);
  Vae1LossBreakdown out;
  Vae1LossGraph(p, model.config(), images, options, &out);
  return out;
}

PseudoLabelImage PseudoLabel(const CategoricalLatentMap& q) {
  const Tensor& probs = q.probs;
  if (probs.rank() != 3) throw InvalidArgument("PseudoLabel expects [C, H, W] probabilities");
  const int c_n = probs.dim(0), h = probs.dim(1), w = probs.dim(2);
  const int bottom = std::max(1, static_cast<int>(std::lround(0.2 * h)));
  std::vector<double> mean(static_cast<size_t>(c_n), 0.0);
  for (int c = 0; c < c_n; ++c) {
    for (int v = h - bottom; v < h; ++v) {
      for (int u = 0; u < w; ++u) mean[c] += probs.at(c, v, u);
    }
  }
  PseudoLabelImage out;
  const auto best = std::max_element(mean.begin(), mean.end());
  out.navigable_channel = static_cast<int>(best - mean.begin());
  if (std::count(mean.begin(), mean.end(), *best) > 1) {
    out.navigable_channel = 0;
    out.degenerate = true;
    std::cerr << "warning: pseudo-label channel tie; defaulting to channel 0\n";
  }
  out.values = Tensor({h, w});
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) out.values.at(v, u) = probs.at(out.navigable_channel, v, u);
  }
  return out;
}

}  // namespace navseg::vae1
