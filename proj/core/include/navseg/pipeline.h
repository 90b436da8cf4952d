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

#ifndef NAVSEG_PIPELINE_H_
#define NAVSEG_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "navseg/kv.h"
#include "navseg/losses.h"
#include "navseg/metrics.h"
#include "navseg/synthdata.h"
#include "navseg/vae1.h"
#include "navseg/vae2.h"

namespace navseg::pipeline {

// Training hyperparameters for either stage, read from `key = value` text.
struct TrainConfig {
  std::string stage;  // "vae1", "vae2" or empty (accepted by both stages)
  int epochs = 60;
  int batch_size = 8;
  double learning_rate = 1e-3;
  int samples = 1;  // K samples per image (relaxed maps or polylines)
  double tau_start = 1.0;
  double tau_end = 0.3;
  losses::LossWeights weights;
  std::vector<double> categorical_prior = {0.5, 0.5};
  double epsilon = 2.0;  // prior standard deviation of every vertex, pixels
  double label_fraction = 0.0;
  double lambda_sup = 1.0;
  uint64_t seed = 1;
  int vertices = 16;
  double sharpness_start = 1.0;
  double sharpness_end = 0.5;
  int vae1_hidden = 8;
  int vae2_channels = 8;
  int gcn_layers = 6;
  int gcn_hidden = 32;

  // Throws ConfigError on a violated invariant.
  void Validate() const;
  KeyValueList ToKeyValues() const;
  // Unknown or duplicate keys raise ConfigError.
  static TrainConfig FromKeyValues(const KeyValueList& kv);
  static TrainConfig Parse(const std::string& text);
  static TrainConfig Load(const std::filesystem::path& path);
};

// Value of a geometric schedule from `start` (epoch 0) to `end` (last epoch).
double ScheduleValue(double start, double end, int epoch, int epochs);

// Training-set scenes whose masks a run at `fraction` may read.
std::vector<int> TrainingLabels(const synth::CorpusReader& corpus, double fraction);

struct Vae1EpochLog {
  int epoch = 0;
  double tau = 0.0;
  double kl = 0.0;  // per-image means over the epoch
  double recon = 0.0;
  double logvar = 0.0;
  double supervised = 0.0;
  double total = 0.0;
  double sigma2 = 0.0;  // value at the end of the epoch
};

struct Vae2EpochLog {
  int epoch = 0;
  double sharpness = 0.0;
  double ssim_term = 0.0;  // per-image means over the epoch
  double mse_term = 0.0;
  double kl_term = 0.0;
  double supervised = 0.0;
  double total = 0.0;
};

struct Vae1Training {
  vae1::Vae1Model model;
  std::vector<Vae1EpochLog> log;
};

struct Vae2Training {
  vae2::Vae2Model model;
  std::vector<Vae2EpochLog> log;
};

std::string FormatVae1Log(const std::vector<Vae1EpochLog>& log);
std::string FormatVae2Log(const std::vector<Vae2EpochLog>& log);

Vae1Training TrainVae1(const synth::CorpusReader& corpus, const TrainConfig& config);

// Pseudo-label targets come from the frozen `vae1`. Without it the run must
// be fully supervised (label_fraction = 1) and the masks serve as targets.
Vae2Training TrainVae2(const synth::CorpusReader& corpus, const TrainConfig& config,
                       const vae1::Vae1Model* vae1);

struct EvalOptions {
  synth::Split split = synth::Split::kTest;
  int samples = 16;  // sampled polylines per scene for the mean +- std block
  uint64_t seed = 0;
};

struct EvalReport {
  std::vector<metrics::EvalRow> vae1_rows;  // empty without a VAE-I model
  std::vector<metrics::EvalRow> vae2_rows;
  metrics::ScoreSummary vae1_summary;
  metrics::ScoreSummary vae2_summary;
  // Spread over samples of the corpus-mean scores of sampled polylines.
  metrics::ScoreSummary vae2_sampled;
  metrics::UncertaintyReport uncertainty;
  std::vector<vae2::PolylineDistribution> polylines;
  double mean_vertex_error = 0.0;  // mean |mu_i - curve(x_i)|, pixels
  KeyValueList config_echo;

  std::string SummaryText() const;
};

EvalReport Evaluate(const vae1::Vae1Model* vae1, const vae2::Vae2Model& vae2,
                    const synth::CorpusReader& corpus, const EvalOptions& options);

// Writes vae1.csv (when present), vae2.csv, summary.txt and polylines/.
void WriteEvalReport(const EvalReport& report, const std::filesystem::path& out_dir);

struct SweepRow {
  double fraction = 0.0;
  uint64_t seed = 0;
  std::string model;  // "vae1" or "vae2"
  metrics::SegmentationScores means;
  std::string status = "ok";
};

struct SweepOptions {
  std::vector<double> fractions = {0.0, 0.01, 0.3, 1.0};
  std::vector<uint64_t> seeds = {1, 2, 3};
  TrainConfig vae1;
  TrainConfig vae2;
  EvalOptions eval;
};

// Trains and evaluates both stages per (fraction, seed) below `out_dir`.
// A failing leg is recorded with its error and the sweep continues.
std::vector<SweepRow> RunLabelSweep(const synth::CorpusReader& corpus,
                                    const SweepOptions& options,
                                    const std::filesystem::path& out_dir);

std::string FormatSweepCsv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> ParseSweepCsv(const std::string& text);

// One SVG per metric: mean +- std against the label fraction per model.
void WriteSweepPlots(const std::vector<SweepRow>& rows, const std::filesystem::path& out_dir);

}  // namespace navseg::pipeline

#endif  // NAVSEG_PIPELINE_H_
