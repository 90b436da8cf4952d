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

#ifndef NAVSEG_METRICS_H_
#define NAVSEG_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "navseg/synthdata.h"
#include "navseg/tensor.h"
#include "navseg/vae2.h"

namespace navseg::metrics {

// Pixel confusion counts with class 1 = navigable.
struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

struct SegmentationScores {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  double iou = 0.0;

  bool operator==(const SegmentationScores&) const = default;
};

// Throws InvalidArgument unless both masks have the same shape and only
// contain 0 and 1.
Confusion CountConfusion(const Tensor& pred, const Tensor& gt);

// Empty-class convention: a ratio whose denominator is zero is 1 when the
// error count it guards is also zero and 0 otherwise. Precision with
// TP + FP = 0 is 1 iff FN = 0, recall with TP + FN = 0 is 1 iff FP = 0, IoU
// with TP + FP + FN = 0 is 1, and the F-score is 0 when P + R = 0.
SegmentationScores ScoresFromConfusion(const Confusion& c);
SegmentationScores SegmentationMetrics(const Tensor& pred, const Tensor& gt);

struct SceneUncertainty {
  double noisy_sigma_mean = 0.0;  // mean sqrt(sigma2) over noisy-column vertices
  double clean_sigma_mean = 0.0;
  int noisy_vertices = 0;
  int clean_vertices = 0;

  bool eligible() const { return noisy_vertices > 0 && clean_vertices > 0; }
};

SceneUncertainty SceneUncertaintyStats(
    const vae2::PolylineDistribution& dist,
    std::span<const synth::ColumnInterval> noise_regions);

struct UncertaintyReport {
  std::vector<SceneUncertainty> scenes;
  int eligible = 0;
  int excluded = 0;
  int ordered = 0;  // eligible scenes with noisy mean strictly above clean mean
  double ordered_fraction = 0.0;
};

UncertaintyReport BuildUncertaintyReport(
    std::span<const vae2::PolylineDistribution> dists,
    std::span<const std::vector<synth::ColumnInterval>> noise_regions);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd Summarize(std::span<const double> values);

struct ScoreSummary {
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  MeanStd fscore;
  MeanStd iou;
};

ScoreSummary SummarizeScores(std::span<const SegmentationScores> scores);

struct EvalRow {
  int scene_id = 0;
  SegmentationScores scores;
  double noisy_sigma_mean = 0.0;  // NaN when not applicable
  double clean_sigma_mean = 0.0;
};

// One header line plus one line per row, floats at 6 significant digits.
std::string FormatEvalCsv(std::span<const EvalRow> rows);

}  // namespace navseg::metrics

#endif  // NAVSEG_METRICS_H_
