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

#include "navseg/vae2.h"

#include <cmath>
#include <sstream>
#include <string>

#include "navseg/errors.h"
#include "navseg/kv.h"
#include "navseg/renderer.h"
#include "navseg/rng.h"
#include "navseg/ten_io.h"

namespace navseg::vae2 {
namespace {

constexpr int kLevels = 3;

std::string Level(int k) { return "ife" + std::to_string(k); }
std::string Gcn(int l) { return "gcn" + std::to_string(l); }

int NodeFeatureDim(const Vae2Config& c) { return 2 * kLevels * c.channels + 2; }

double InverseSoftplus(double y) { return y > 30 ? y : std::log(std::expm1(y)); }

}  // namespace

void PolylineDistribution::Validate(int width) const {
  const size_t n = xs.size();
  if (n < 2 || mu.size() != n || sigma2.size() != n || init_ys.size() != n) {
    throw InvalidArgument("polyline fields must share a length >= 2");
  }
  if (xs.front() != 0.0 || xs.back() != width - 1) {
    throw InvalidArgument("polyline must span the full width");
  }
  for (size_t i = 0; i < n; ++i) {
    if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidArgument("polyline xs not increasing");
    if (!(sigma2[i] > 0)) throw InvalidArgument("polyline variance must be positive");
    if (!std::isfinite(mu[i])) throw InvalidArgument("polyline mean not finite");
  }
}

PriorSpec PriorSpec::Uniform(int classes, int vertices, double epsilon) {
  return {std::vector<double>(static_cast<size_t>(classes), 1.0 / classes),
          std::vector<double>(static_cast<size_t>(vertices), epsilon * epsilon)};
}

void PriorSpec::Validate() const {
  double total = 0.0;
  for (double p : categorical_prior) {
    if (!(p > 0)) throw InvalidArgument("categorical prior must be strictly positive");
    total += p;
  }
  if (categorical_prior.empty() || std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("categorical prior must sum to 1");
  }
  for (double e : epsilon2) {
    if (!(e > 0)) throw InvalidArgument("prior variances must be positive");
  }
}

KeyValueList Vae2Config::ToKeyValues() const {
  return {{"height", std::to_string(height)},
          {"width", std::to_string(width)},
          {"vertices", std::to_string(vertices)},
          {"channels", std::to_string(channels)},
          {"gcn_layers", std::to_string(gcn_layers)},
          {"gcn_hidden", std::to_string(gcn_hidden)},
          {"init_y", FormatNumber(init_y)},
          {"offset_scale", FormatNumber(offset_scale)},
          {"init_sigma2", FormatNumber(init_sigma2)}};
}

Vae2Config Vae2Config::FromKeyValues(const KeyValueList& kv) {
  auto need = [&](const std::string& key) -> const std::string& {
    const std::string* v = FindValue(kv, key);
    if (!v) throw ConfigError("vae2 config missing '" + key + "'");
    return *v;
  };
  Vae2Config c;
  c.height = static_cast<int>(ParseIntValue(need("height"), "height"));
  c.width = static_cast<int>(ParseIntValue(need("width"), "width"));
  c.vertices = static_cast<int>(ParseIntValue(need("vertices"), "vertices"));
  c.channels = static_cast<int>(ParseIntValue(need("channels"), "channels"));
  c.gcn_layers = static_cast<int>(ParseIntValue(need("gcn_layers"), "gcn_layers"));
  c.gcn_hidden = static_cast<int>(ParseIntValue(need("gcn_hidden"), "gcn_hidden"));
  c.init_y = ParseDoubleValue(need("init_y"), "init_y");
  c.offset_scale = ParseDoubleValue(need("offset_scale"), "offset_scale");
  c.init_sigma2 = ParseDoubleValue(need("init_sigma2"), "init_sigma2");
  return c;
}

Vae2Model::Vae2Model(const Vae2Config& config, uint64_t seed) : config_(config) {
  if (config.vertices < 2) throw InvalidArgument("vae2 needs at least 2 vertices");
  if (config.height < 16 || config.width < 16) throw InvalidArgument("vae2 image too small");
  Rng rng = MakeRng({seed, 0x7AE2});
  const int c = config.channels, d = config.gcn_hidden;
  AddConv(params_, Level(0), 3, c, 3, rng);
  AddConv(params_, Level(1), c, c, 3, rng);
  AddConv(params_, Level(2), c, c, 3, rng);
  AddLinear(params_, "gcn_in", NodeFeatureDim(config), d, rng);
  for (int l = 0; l < config.gcn_layers; ++l) {
    AddLinear(params_, Gcn(l) + ".self", d, d, rng, 0.5);
    params_.Add(Gcn(l) + ".nbr.w", HeNormal({d, d}, 2 * d, rng, 0.5));
  }
  AddLinear(params_, "head", d, 2, rng, 0.05);
  params_.Get("head.b")[1] = InverseSoftplus(config.init_sigma2);
}

Vae2Model::Vae2Model(const Vae2Config& config, ParamStore params)
    : config_(config), params_(std::move(params)) {}

Vae2Model Vae2Model::FromCheckpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "vae2") throw ConfigError("checkpoint kind is '" + ckpt.kind + "', expected vae2");
  Vae2Config config = Vae2Config::FromKeyValues(ckpt.config);
  Vae2Model reference(config, 0);
  for (size_t i = 0; i < reference.params_.size(); ++i) {
    const std::string& name = reference.params_.name(i);
    if (!ckpt.params.Contains(name) ||
        ckpt.params.Get(name).shape() != reference.params_.tensor(i).shape()) {
      throw ConfigError("vae2 checkpoint parameter '" + name + "' missing or mis-shaped");
    }
  }
  return Vae2Model(config, ckpt.params);
}

Checkpoint Vae2Model::ToCheckpoint(const KeyValueList& extra_config) const {
  Checkpoint ckpt;
  ckpt.kind = "vae2";
  ckpt.provenance = BuildProvenance();
  ckpt.config = config_.ToKeyValues();
  ckpt.config.insert(ckpt.config.end(), extra_config.begin(), extra_config.end());
  ckpt.params = params_;
  return ckpt;
}

std::vector<double> Vae2Model::Columns() const {
  return render::EvenColumns(config_.vertices, config_.width);
}

std::vector<double> Vae2Model::InitialRows() const {
  return std::vector<double>(static_cast<size_t>(config_.vertices), config_.InitialRow());
}

Vae2Graph ForwardGraph(const BoundParams& p, const Vae2Config& config,
                       const ad::Var& image, std::span<const double> xs,
                       std::span<const double> init_ys) {
  const Tensor& img = image.value();
  if (img.shape() != std::vector<int>{3, config.height, config.width}) {
    throw InvalidArgument("vae2: image shape " + ShapeString(img.shape()) +
                          " does not match model " + std::to_string(config.height) +
                          "x" + std::to_string(config.width));
  }
  const size_t n = xs.size();
  if (n < 2 || init_ys.size() != n) throw InvalidArgument("vae2: need N >= 2 vertices");

  std::vector<ad::Var> levels;
  levels.push_back(ad::Elu(ConvLayer(p, Level(0), image, 1, 1)));
  levels.push_back(ad::Elu(ConvLayer(p, Level(1), levels[0], 2, 1)));
  levels.push_back(ad::Elu(ConvLayer(p, Level(2), levels[1], 2, 1)));

  std::vector<ad::Var> parts;
  for (int k = 0; k < kLevels; ++k) {
    const double stride = static_cast<double>(1 << k);
    std::vector<ad::Point> pts(n);
    std::vector<double> cols(n);
    for (size_t i = 0; i < n; ++i) {
      pts[i] = {xs[i] / stride, init_ys[i] / stride};
      cols[i] = xs[i] / stride;
    }
    parts.push_back(ad::SampleBilinear(levels[k], pts));
    parts.push_back(ad::SampleColumns(ad::ColumnMean(levels[k]), cols));
  }
  Tensor coords({static_cast<int>(n), 2});
  for (size_t i = 0; i < n; ++i) {
    coords.at(static_cast<int>(i), 0) = xs[i] / config.width;
    coords.at(static_cast<int>(i), 1) = init_ys[i] / config.height;
  }
  parts.push_back(ad::Constant(std::move(coords)));
  const ad::Var features = ad::ConcatColumns(parts);

  ad::Var h = ad::Elu(LinearLayer(p, "gcn_in", features));
  for (int l = 0; l < config.gcn_layers; ++l) {
    const ad::Var self = LinearLayer(p, Gcn(l) + ".self", h);
    const ad::Var nbr = ad::MatMul(ad::ChainNeighborSum(h), p[Gcn(l) + ".nbr.w"]);
    h = ad::Add(h, ad::Elu(ad::Add(self, nbr)));
  }
  const ad::Var out = LinearLayer(p, "head", h);

  Tensor init({static_cast<int>(n)});
  for (size_t i = 0; i < n; ++i) init[i] = init_ys[i];
  Tensor floor({static_cast<int>(n)}, kVarianceFloor);
  Vae2Graph g;
  g.mu = ad::AddConstant(ad::Scale(ad::Column(out, 0), config.offset_scale), init);
  g.sigma2 = ad::AddConstant(ad::Softplus(ad::Column(out, 1)), floor);
  return g;
}

PolylineDistribution Forward(const Vae2Model& model, const Tensor& image,
                             std::span<const double> init_ys) {
  const std::vector<double> xs = render::EvenColumns(static_cast<int>(init_ys.size()),
                                                     model.config().width);
  const BoundParams p(model.params(), false);
  const Vae2Graph g = ForwardGraph(p, model.config(), ad::Constant(image), xs, init_ys);
  PolylineDistribution dist;
  dist.xs = xs;
  dist.init_ys.assign(init_ys.begin(), init_ys.end());
  dist.mu.assign(g.mu.value().values().begin(), g.mu.value().values().end());
  dist.sigma2.assign(g.sigma2.value().values().begin(), g.sigma2.value().values().end());
  return dist;
}

PolylineDistribution Forward(const Vae2Model& model, const Tensor& image) {
  const std::vector<double> init = model.InitialRows();
  return Forward(model, image, init);
}

std::vector<double> StandardNormals(size_t n, uint64_t seed) {
  Rng rng = MakeRng({seed, 0xE7A});
  std::vector<double> eta(n);
  for (double& e : eta) e = StandardNormal(rng);
  return eta;
}

std::vector<double> ReparameterizeSample(const PolylineDistribution& dist,
                                         uint64_t seed) {
  const std::vector<double> eta = StandardNormals(dist.size(), seed);
  std::vector<double> y(dist.size());
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] = dist.mu[i] + std::sqrt(std::max(dist.sigma2[i], kVarianceFloor)) * eta[i];
  }
  return y;
}

ad::Var ReparameterizeSample(const ad::Var& mu, const ad::Var& sigma2,
                             uint64_t seed) {
  if (mu.shape() != sigma2.shape()) throw InvalidArgument("mu/sigma2 shape mismatch");
  const size_t n = mu.value().size();
  const std::vector<double> eta = StandardNormals(n, seed);
  Tensor floor_gap(sigma2.shape());
  for (size_t i = 0; i < n; ++i) {
    floor_gap[i] = std::max(0.0, kVarianceFloor - sigma2.value()[i]);
  }
  const ad::Var sd = ad::Sqrt(ad::AddConstant(sigma2, floor_gap));
  return ad::Add(mu, ad::MulConstant(sd, Tensor(mu.shape(), eta)));
}

double GaussianPriorKl(std::span<const double> sigma2,
                       std::span<const double> epsilon2) {
  if (sigma2.size() != epsilon2.size() || sigma2.empty()) {
    throw InvalidArgument("GaussianPriorKl: length mismatch");
  }
  double total = 0.0;
  for (size_t i = 0; i < sigma2.size(); ++i) {
    if (!(sigma2[i] > 0) || !(epsilon2[i] > 0)) {
      throw InvalidArgument("GaussianPriorKl: variances must be positive");
    }
    total += 0.5 * std::log(epsilon2[i]) - 0.5 * std::log(sigma2[i]) +
             (sigma2[i] - epsilon2[i]) / (2.0 * epsilon2[i]);
  }
  return total / static_cast<double>(sigma2.size());
}

ad::Var GaussianPriorKl(const ad::Var& sigma2, std::span<const double> epsilon2) {
  const Tensor& s = sigma2.value();
  const double value = GaussianPriorKl(s.values(), epsilon2);
  std::vector<double> eps(epsilon2.begin(), epsilon2.end());
  return ad::MakeOp(Tensor::Scalar(value), {sigma2}, [eps](ad::Node& n) {
    ad::Node& in = *n.inputs[0];
    Tensor& g = in.Grad();
    const double scale = n.grad[0] / static_cast<double>(eps.size());
    for (size_t i = 0; i < eps.size(); ++i) {
      g[i] += scale * (-0.5 / in.value[i] + 0.5 / eps[i]);
    }
  });
}

void WritePolyline(const std::filesystem::path& path,
                   const PolylineDistribution& dist) {
  std::ostringstream os;
  for (size_t i = 0; i < dist.size(); ++i) {
    os << FormatNumber(dist.xs[i]) << ' ' << FormatNumber(dist.mu[i]) << ' '
       << FormatNumber(dist.sigma2[i]) << '\n';
  }
  WriteTextFile(path, os.str());
}

}  // namespace navseg::vae2
