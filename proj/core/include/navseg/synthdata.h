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

// Procedural surface-normal scenes with a known navigable boundary.
//
// A scene is split by a single vertically monotone boundary curve: pixels
// strictly below the curve (larger row index) are navigable and carry
// up-facing normals, pixels above carry near-horizontal obstacle normals.
// Selected column intervals receive amplified perturbation plus wrong-class
// distractor patches close to the boundary.
#ifndef NAVSEG_SYNTHDATA_H_
#define NAVSEG_SYNTHDATA_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "navseg/tensor.h"

namespace navseg::synth {

// Boundary row as a function of column, defined by M control points at
// evenly spaced columns and evaluated with monotone piecewise-cubic
// (Fritsch-Carlson) interpolation, so it never overshoots its controls.
struct BoundaryCurve {
  std::vector<double> control_x;
  std::vector<double> control_y;

  double Evaluate(double column) const;
  std::vector<double> EvaluateColumns(int width) const;
};

struct NoiseParams {
  double base = 0.08;           // per-component perturbation std
  double amplification = 4.0;   // multiplier inside noise regions
  int min_regions = 1;
  int max_regions = 2;
  int patches_per_region = 3;
};

// Half-open column interval [lo, hi).
struct ColumnInterval {
  int lo = 0;
  int hi = 0;
  bool Contains(double column) const { return column >= lo && column < hi; }
  bool operator==(const ColumnInterval&) const = default;
};

struct SceneSample {
  Tensor normals;  // [H, W, 3]
  Tensor mask;     // [H, W], 1 = navigable
  BoundaryCurve curve;
  std::vector<ColumnInterval> noise_regions;
  uint64_t seed = 0;

  int height() const { return normals.dim(0); }
  int width() const { return normals.dim(1); }
};

// [H, W, 3] -> [3, H, W].
Tensor ToChannelFirst(const Tensor& hwc);

BoundaryCurve GenerateBoundary(uint64_t seed, int height, int width,
                               int control_points);

SceneSample RenderScene(const BoundaryCurve& curve, int height, int width,
                        const NoiseParams& noise, uint64_t seed);

struct CorpusConfig {
  int n_train = 200;
  int n_test = 40;
  int height = 64;
  int width = 96;
  int control_points = 5;
  double label_fraction = 0.0;
  uint64_t seed = 1;
  NoiseParams noise;
};

enum class Split { kTrain, kTest };
std::string SplitName(Split split);
Split ParseSplit(const std::string& name);

// Per-scene stream seed; train and test use disjoint derivations.
uint64_t SceneSeed(uint64_t corpus_seed, Split split, int index);
SceneSample GenerateScene(const CorpusConfig& config, Split split, int index);

// The first round(p * n_train) entries of a seed-determined permutation of
// train indices, sorted. Subsets are nested in p at a fixed seed.
std::vector<int> LabeledSubset(uint64_t seed, int n_train, double p);

struct Corpus {
  CorpusConfig config;
  std::vector<SceneSample> train;
  std::vector<SceneSample> test;
  std::vector<int> labeled_ids;
};

Corpus GenerateCorpus(const CorpusConfig& config);

// Writes the corpus directory. Refuses a non-empty `root` unless
// `overwrite` is set, in which case the directory is replaced.
void BuildCorpus(const CorpusConfig& config, const std::filesystem::path& root,
                 bool overwrite);

std::string SceneDirName(int index);

// Reads a corpus directory. Every ground-truth access (mask or curve file)
// is appended to an audit log, which lets callers prove that unsupervised
// training never touched labels.
class CorpusReader {
 public:
  explicit CorpusReader(std::filesystem::path root);

  const CorpusConfig& config() const { return config_; }
  const std::filesystem::path& root() const { return root_; }
  int count(Split split) const;
  const std::vector<int>& labeled_ids() const { return labeled_ids_; }

  Tensor ReadNormals(Split split, int index) const;  // [H, W, 3]
  std::vector<ColumnInterval> ReadNoiseRegions(Split split, int index) const;
  Tensor ReadMask(Split split, int index) const;     // audited
  BoundaryCurve ReadCurve(Split split, int index) const;  // audited

  const std::vector<std::string>& audit_log() const { return audit_log_; }
  void ClearAuditLog() { audit_log_.clear(); }

 private:
  std::filesystem::path SceneDir(Split split, int index) const;

  std::filesystem::path root_;
  CorpusConfig config_;
  std::vector<int> labeled_ids_;
  mutable std::vector<std::string> audit_log_;
};

}  // namespace navseg::synth

#endif  // NAVSEG_SYNTHDATA_H_
