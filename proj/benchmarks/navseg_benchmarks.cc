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

#include <vector>

#include <benchmark/benchmark.h>

#include "navseg/autodiff.h"
#include "navseg/losses.h"
#include "navseg/nn.h"
#include "navseg/renderer.h"
#include "navseg/rng.h"
#include "navseg/synthdata.h"
#include "navseg/vae1.h"
#include "navseg/vae2.h"

namespace navseg {
namespace {

Tensor RandomTensor(std::vector<int> shape, uint64_t seed) {
  Rng rng = MakeRng({seed});
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = UniformIn(rng, -1.0, 1.0);
  return t;
}

Tensor SceneImage() {
  return synth::ToChannelFirst(
      synth::GenerateScene(synth::CorpusConfig{}, synth::Split::kTrain, 0).normals);
}

void BM_Conv3x3(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  ParamStore store;
  Rng rng = MakeRng({1});
  AddConv(store, "c", channels, channels, 3, rng);
  const Tensor x = RandomTensor({channels, 64, 96}, 2);
  const BoundParams p(store, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ConvLayer(p, "c", ad::Constant(x), 1, 1).value()[0]);
  }
}
BENCHMARK(BM_Conv3x3)->Arg(3)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_SoftRasterize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> xs = render::EvenColumns(n, 96);
  const std::vector<double> ys(static_cast<size_t>(n), 32.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render::SoftRasterize(ys, xs, 64, 96, 1.0).values[0]);
  }
}
BENCHMARK(BM_SoftRasterize)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SoftRasterizeBackward(benchmark::State& state) {
  const std::vector<double> xs = render::EvenColumns(16, 96);
  const std::vector<double> ys(16, 32.0);
  const Tensor grad = RandomTensor({64, 96}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(render::SoftRasterizeBackward(grad, ys, xs, 64, 96, 1.0)[0]);
  }
}
BENCHMARK(BM_SoftRasterizeBackward)->Unit(benchmark::kMicrosecond);

void BM_Ssim(benchmark::State& state) {
  const Tensor a = RandomTensor({64, 96}, 4), b = RandomTensor({64, 96}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(losses::Ssim(a, b));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMicrosecond);

void BM_SsimGradient(benchmark::State& state) {
  const Tensor a = RandomTensor({64, 96}, 4), b = RandomTensor({64, 96}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(losses::SsimGradient(a, b)[0]);
}
BENCHMARK(BM_SsimGradient)->Unit(benchmark::kMicrosecond);

void BM_Vae1Forward(benchmark::State& state) {
  const vae1::Vae1Model model(vae1::Vae1Config{}, 1);
  const Tensor image = SceneImage();
  for (auto _ : state) {
    benchmark::DoNotOptimize(vae1::Forward(model, image, 0.5, 7).reconstruction[0]);
  }
}
BENCHMARK(BM_Vae1Forward)->Unit(benchmark::kMillisecond);

void BM_Vae1LossBackward(benchmark::State& state) {
  const vae1::Vae1Model model(vae1::Vae1Config{}, 1);
  const std::vector<Tensor> batch = {SceneImage()};
  const vae1::Vae1LossOptions options;
  for (auto _ : state) {
    const BoundParams p(model.params(), true);
    ad::Backward(vae1::Vae1LossGraph(p, model.config(), batch, options));
    benchmark::DoNotOptimize(p.Gradients());
  }
}
BENCHMARK(BM_Vae1LossBackward)->Unit(benchmark::kMillisecond);

void BM_Vae2Forward(benchmark::State& state) {
  const vae2::Vae2Model model(vae2::Vae2Config{}, 1);
  const Tensor image = SceneImage();
  for (auto _ : state) benchmark::DoNotOptimize(vae2::Forward(model, image).mu[0]);
}
BENCHMARK(BM_Vae2Forward)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace navseg

BENCHMARK_MAIN();
