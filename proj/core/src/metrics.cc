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

#include "navseg/metrics.h"

#include <cmath>
#include <sstream>

#include "navseg/errors.h"
#include "navseg/kv.h"

namespace navseg::metrics {

Confusion CountConfusion(const Tensor& pred, const Tensor& gt) {
  if (!pred.SameShape(gt)) {
    throw InvalidArgument("metrics: shape mismatch " + ShapeString(pred.shape()) + " vs " +
                          ShapeString(gt.shape()));
  }
  Confusion c;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i], g = gt[i];
    if ((p != 0.0 && p != 1.0) || (g != 0.0 && g != 1.0)) {
      throw InvalidArgument("metrics: masks must be binary");
    }
    if (p == 1.0) {
      (g == 1.0 ? c.tp : c.fp) += 1;
    } else {
      (g == 1.0 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

SegmentationScores ScoresFromConfusion(const Confusion& c) {
  auto ratio = [](int64_t num, int64_t den, int64_t guarded_errors) {
    if (den == 0) return guarded_errors == 0 ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  SegmentationScores s;
  if (c.total() == 0) throw InvalidArgument("metrics: empty masks");
  s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  s.precision = ratio(c.tp, c.tp + c.fp, c.fn);
  s.recall = ratio(c.tp, c.tp + c.fn, c.fp);
  s.fscore = (s.precision + s.recall) > 0
                 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                 : 0.0;
  s.iou = ratio(c.tp, c.tp + c.fp + c.fn, 0);
  return s;
}

SegmentationScores SegmentationMetrics(const Tensor& pred, const Tensor& gt) {
  return ScoresFromConfusion(CountConfusion(pred, gt));
}

SceneUncertainty SceneUncertaintyStats(
    const vae2::PolylineDistribution& dist,
    std::span<const synth::ColumnInterval> noise_regions) {
  SceneUncertainty out;
  double noisy = 0.0, clean = 0.0;
  for (size_t i = 0; i < dist.size(); ++i) {
    const double sigma = std::sqrt(dist.sigma2[i]);
    bool in_noise = false;
    for (const auto& region : noise_regions) in_noise = in_noise || region.Contains(dist.xs[i]);
    if (in_noise) {
      noisy += sigma;
      ++out.noisy_vertices;
    } else {
      clean += sigma;
      ++out.clean_vertices;
    }
  }
  const double nan = std::nan("");
  out.noisy_sigma_mean = out.noisy_vertices > 0 ? noisy / out.noisy_vertices : nan;
  out.clean_sigma_mean = out.clean_vertices > 0 ? clean / out.clean_vertices : nan;
  return out;
}

UncertaintyReport BuildUncertaintyReport(
    std::span<const vae2::PolylineDistribution> dists,
    std::span<const std::vector<synth::ColumnInterval>> noise_regions) {
  if (dists.size() != noise_regions.size()) {
    throw InvalidArgument("uncertainty report: one noise annotation per scene is required");
  }
  UncertaintyReport report;
  for (size_t i = 0; i < dists.size(); ++i) {
    const SceneUncertainty s = SceneUncertaintyStats(dists[i], noise_regions[i]);
    report.scenes.push_back(s);
    if (!s.eligible()) {
      ++report.excluded;
      continue;
    }
    ++report.eligible;
    if (s.noisy_sigma_mean > s.clean_sigma_mean) ++report.ordered;
  }
  report.ordered_fraction =
      report.eligible > 0 ? static_cast<double>(report.ordered) / report.eligible : 0.0;
  return report;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

ScoreSummary SummarizeScores(std::span<const SegmentationScores> scores) {
  auto column = [&](double SegmentationScores::*field) {
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto& s : scores) v.push_back(s.*field);
    return Summarize(v);
  };
  return {column(&SegmentationScores::accuracy), column(&SegmentationScores::precision),
          column(&SegmentationScores::recall), column(&SegmentationScores::fscore),
          column(&SegmentationScores::iou)};
}

std::string FormatEvalCsv(std::span<const EvalRow> rows) {
  std::ostringstream out;
  out << "scene_id,accuracy,precision,recall,fscore,iou,noisy_sigma_mean,clean_sigma_mean\n";
  for (const auto& r : rows) {
    out << r.scene_id << ',' << FormatSig6(r.scores.accuracy) << ','
        << FormatSig6(r.scores.precision) << ',' << FormatSig6(r.scores.recall) << ','
        << FormatSig6(r.scores.fscore) << ',' << FormatSig6(r.scores.iou) << ','
        << FormatSig6(r.noisy_sigma_mean) << ',' << FormatSig6(r.clean_sigma_mean) << '\n';
  }
  return out.str();
}

}  // namespace navseg::metrics
