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

#include "navseg/pipeline.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "navseg/checkpoint.h"
#include "navseg/errors.h"
#include "navseg/renderer.h"
#include "navseg/rng.h"
#include "navseg/ten_io.h"

namespace navseg::pipeline {
namespace {

using synth::CorpusReader;
using synth::Split;

// Applies one `key = value` pair to a config; false for an unknown key.
bool ApplyKey(TrainConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&] { return static_cast<int>(ParseIntValue(value, key)); };
  auto as_double = [&] { return ParseDoubleValue(value, key); };
  const std::map<std::string, std::function<void()>> setters = {
      {"stage", [&] { c.stage = value; }},
      {"epochs", [&] { c.epochs = as_int(); }},
      {"batch_size", [&] { c.batch_size = as_int(); }},
      {"learning_rate", [&] { c.learning_rate = as_double(); }},
      {"samples", [&] { c.samples = as_int(); }},
      {"tau_start", [&] { c.tau_start = as_double(); }},
      {"tau_end", [&] { c.tau_end = as_double(); }},
      {"lambda1", [&] { c.weights.lambda1 = as_double(); }},
      {"lambda2", [&] { c.weights.lambda2 = as_double(); }},
      {"lambda3", [&] { c.weights.lambda3 = as_double(); }},
      {"categorical_prior", [&] { c.categorical_prior = ParseDoubleList(value, key); }},
      {"epsilon", [&] { c.epsilon = as_double(); }},
      {"label_fraction", [&] { c.label_fraction = as_double(); }},
      {"lambda_sup", [&] { c.lambda_sup = as_double(); }},
      {"seed", [&] { c.seed = static_cast<uint64_t>(ParseIntValue(value, key)); }},
      {"vertices", [&] { c.vertices = as_int(); }},
      {"sharpness_start", [&] { c.sharpness_start = as_double(); }},
      {"sharpness_end", [&] { c.sharpness_end = as_double(); }},
      {"vae1_hidden", [&] { c.vae1_hidden = as_int(); }},
      {"vae2_channels", [&] { c.vae2_channels = as_int(); }},
      {"gcn_layers", [&] { c.gcn_layers = as_int(); }},
      {"gcn_hidden", [&] { c.gcn_hidden = as_int(); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) return false;
  it->second();
  return true;
}

void CheckDims(int model_h, int model_w, const CorpusReader& corpus, const std::string& what) {
  const auto& cc = corpus.config();
  if (model_h != cc.height || model_w != cc.width) {
    throw ConfigError(what + " expects " + std::to_string(model_h) + "x" +
                      std::to_string(model_w) + " images but the corpus holds " +
                      std::to_string(cc.height) + "x" + std::to_string(cc.width));
  }
}

std::vector<Tensor> LoadImages(const CorpusReader& corpus, Split split) {
  std::vector<Tensor> images;
  for (int i = 0; i < corpus.count(split); ++i) {
    images.push_back(synth::ToChannelFirst(corpus.ReadNormals(split, i)));
  }
  return images;
}

// Masks of the labeled training scenes only; other entries stay empty.
std::vector<Tensor> LoadLabeledMasks(const CorpusReader& corpus, const std::vector<int>& ids) {
  std::vector<Tensor> masks(static_cast<size_t>(corpus.count(Split::kTrain)));
  for (int id : ids) masks[id] = corpus.ReadMask(Split::kTrain, id);
  return masks;
}

std::vector<int> EpochOrder(int n, uint64_t seed, int epoch) {
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng({seed, 0x0DE7, static_cast<uint64_t>(epoch)});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

KeyValueList Prefixed(const std::string& prefix, const KeyValueList& kv) {
  KeyValueList out;
  for (const auto& [k, v] : kv) out.emplace_back(prefix + k, v);
  return out;
}

Tensor ThresholdMask(const Tensor& probs) {
  Tensor out(probs.shape());
  for (size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5 ? 1.0 : 0.0;
  return out;
}

std::string SummaryLine(const std::string& label, const metrics::ScoreSummary& s) {
  std::ostringstream os;
  auto field = [&](const char* name, const metrics::MeanStd& m) {
    os << ' ' << name << '=' << FormatSig6(m.mean) << "+-" << FormatSig6(m.std);
  };
  os << label;
  field("accuracy", s.accuracy);
  field("precision", s.precision);
  field("recall", s.recall);
  field("fscore", s.fscore);
  field("iou", s.iou);
  return os.str();
}

std::string Sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void TrainConfig::Validate() const {
  if (!stage.empty() && stage != "vae1" && stage != "vae2") {
    throw ConfigError("stage must be vae1 or vae2, got '" + stage + "'");
  }
  if (epochs < 1 || batch_size < 1 || samples < 1) {
    throw ConfigError("epochs, batch_size and samples must be positive");
  }
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(tau_start > 0) || !(tau_end > 0)) throw ConfigError("tau schedule must be positive");
  if (!(sharpness_start > 0) || !(sharpness_end > 0)) {
    throw ConfigError("sharpness schedule must be positive");
  }
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (!(label_fraction >= 0.0 && label_fraction <= 1.0)) {
    throw ConfigError("label_fraction must lie in [0, 1]");
  }
  if (!(lambda_sup >= 0)) throw ConfigError("lambda_sup must be nonnegative");
  if (vertices < 2 || vae1_hidden < 1 || vae2_channels < 1 || gcn_layers < 0 || gcn_hidden < 1) {
    throw ConfigError("network sizes out of range");
  }
  try {
    weights.Validate();
    vae2::PriorSpec{categorical_prior, {epsilon * epsilon}}.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

KeyValueList TrainConfig::ToKeyValues() const {
  KeyValueList kv;
  if (!stage.empty()) kv.emplace_back("stage", stage);
  kv.emplace_back("epochs", std::to_string(epochs));
  kv.emplace_back("batch_size", std::to_string(batch_size));
  kv.emplace_back("learning_rate", FormatNumber(learning_rate));
  kv.emplace_back("samples", std::to_string(samples));
  kv.emplace_back("tau_start", FormatNumber(tau_start));
  kv.emplace_back("tau_end", FormatNumber(tau_end));
  kv.emplace_back("lambda1", FormatNumber(weights.lambda1));
  kv.emplace_back("lambda2", FormatNumber(weights.lambda2));
  kv.emplace_back("lambda3", FormatNumber(weights.lambda3));
  kv.emplace_back("categorical_prior", FormatDoubleList(categorical_prior));
  kv.emplace_back("epsilon", FormatNumber(epsilon));
  kv.emplace_back("label_fraction", FormatNumber(label_fraction));
  kv.emplace_back("lambda_sup", FormatNumber(lambda_sup));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("vertices", std::to_string(vertices));
  kv.emplace_back("sharpness_start", FormatNumber(sharpness_start));
  kv.emplace_back("sharpness_end", FormatNumber(sharpness_end));
  kv.emplace_back("vae1_hidden", std::to_string(vae1_hidden));
  kv.emplace_back("vae2_channels", std::to_string(vae2_channels));
  kv.emplace_back("gcn_layers", std::to_string(gcn_layers));
  kv.emplace_back("gcn_hidden", std::to_string(gcn_hidden));
  return kv;
}

TrainConfig TrainConfig::FromKeyValues(const KeyValueList& kv) {
  TrainConfig config;
  for (const auto& [key, value] : kv) {
    if (!ApplyKey(config, key, value)) throw ConfigError("unknown config key '" + key + "'");
  }
  config.Validate();
  return config;
}

TrainConfig TrainConfig::Parse(const std::string& text) {
  return FromKeyValues(ParseKeyValueText(text, "train config"));
}

TrainConfig TrainConfig::Load(const std::filesystem::path& path) {
  return FromKeyValues(ParseKeyValueText(ReadTextFile(path), path.string()));
}

double ScheduleValue(double start, double end, int epoch, int epochs) {
  if (epochs <= 1) return start;
  const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return start * std::pow(end / start, t);
}

std::vector<int> TrainingLabels(const CorpusReader& corpus, double fraction) {
  return synth::LabeledSubset(corpus.config().seed, corpus.count(Split::kTrain), fraction);
}

std::string FormatVae1Log(const std::vector<Vae1EpochLog>& log) {
  std::ostringstream os;
  os << "epoch,tau,kl,recon,logvar,supervised,total,sigma2\n";
  for (const auto& r : log) {
    os << r.epoch << ',' << FormatSig6(r.tau) << ',' << FormatSig6(r.kl) << ','
       << FormatSig6(r.recon) << ',' << FormatSig6(r.logvar) << ',' << FormatSig6(r.supervised)
       << ',' << FormatSig6(r.total) << ',' << FormatSig6(r.sigma2) << '\n';
  }
  return os.str();
}

std::string FormatVae2Log(const std::vector<Vae2EpochLog>& log) {
  std::ostringstream os;
  os << "epoch,sharpness,ssim_term,mse_term,kl_term,supervised,total\n";
  for (const auto& r : log) {
    os << r.epoch << ',' << FormatSig6(r.sharpness) << ',' << FormatSig6(r.ssim_term) << ','
       << FormatSig6(r.mse_term) << ',' << FormatSig6(r.kl_term) << ','
       << FormatSig6(r.supervised) << ',' << FormatSig6(r.total) << '\n';
  }
  return os.str();
}

Vae1Training TrainVae1(const CorpusReader& corpus, const TrainConfig& config) {
  config.Validate();
  if (!config.stage.empty() && config.stage != "vae1") {
    throw ConfigError("train-vae1 got a config for stage " + config.stage);
  }
  const auto& cc = corpus.config();
  const vae1::Vae1Config mc{cc.height, cc.width,
                            static_cast<int>(config.categorical_prior.size()),
                            config.vae1_hidden};
  Vae1Training run{vae1::Vae1Model(mc, config.seed), {}};
  const std::vector<Tensor> images = LoadImages(corpus, Split::kTrain);
  const std::vector<int> labeled = TrainingLabels(corpus, config.label_fraction);
  const std::vector<Tensor> masks = LoadLabeledMasks(corpus, labeled);
  std::vector<bool> is_labeled(images.size(), false);
  for (int id : labeled) is_labeled[id] = true;

  Adam adam(run.model.params(), config.learning_rate);
  const int n = static_cast<int>(images.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Vae1EpochLog row;
    row.epoch = epoch;
    row.tau = ScheduleValue(config.tau_start, config.tau_end, epoch, config.epochs);
    const std::vector<int> order = EpochOrder(n, config.seed, epoch);
    for (int start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
      const int end = std::min(n, start + config.batch_size);
      std::vector<Tensor> batch_images;
      vae1::Vae1LossOptions options;
      options.samples = config.samples;
      options.tau = row.tau;
      options.prior = config.categorical_prior;
      options.lambda_sup = config.lambda_sup;
      options.seed = DeriveSeed({config.seed, 0x7A1, static_cast<uint64_t>(epoch),
                                 static_cast<uint64_t>(batch)});
      for (int j = start; j < end; ++j) {
        batch_images.push_back(images[order[j]]);
        options.gt.push_back(is_labeled[order[j]] ? &masks[order[j]] : nullptr);
      }
      const BoundParams p(run.model.params(), true);
      vae1::Vae1LossBreakdown parts;
      const ad::Var loss = vae1::Vae1LossGraph(p, mc, batch_images, options, &parts);
      ad::Backward(ad::Scale(loss, 1.0 / static_cast<double>(end - start)));
      adam.Step(run.model.params(), p.Gradients());
      run.model.ProjectParameters();
      row.kl += parts.kl;
      row.recon += parts.recon;
      row.logvar += parts.logvar;
      row.supervised += parts.supervised;
      row.total += parts.total;
    }
    for (double* v : {&row.kl, &row.recon, &row.logvar, &row.supervised, &row.total}) *v /= n;
    row.sigma2 = run.model.sigma2();
    run.log.push_back(row);
  }
  return run;
}

Vae2Training TrainVae2(const CorpusReader& corpus, const TrainConfig& config,
                       const vae1::Vae1Model* vae1) {
  config.Validate();
  if (!config.stage.empty() && config.stage != "vae2") {
    throw ConfigError("train-vae2 got a config for stage " + config.stage);
  }
  if (vae1 == nullptr && config.label_fraction < 1.0) {
    throw ConfigError("a VAE-I checkpoint is required when label_fraction < 1");
  }
  if (vae1 != nullptr) CheckDims(vae1->config().height, vae1->config().width, corpus, "VAE-I");
  const auto& cc = corpus.config();
  vae2::Vae2Config mc;
  mc.height = cc.height;
  mc.width = cc.width;
  mc.vertices = config.vertices;
  mc.channels = config.vae2_channels;
  mc.gcn_layers = config.gcn_layers;
  mc.gcn_hidden = config.gcn_hidden;
  Vae2Training run{vae2::Vae2Model(mc, config.seed), {}};

  const std::vector<Tensor> images = LoadImages(corpus, Split::kTrain);
  const std::vector<int> labeled = TrainingLabels(corpus, config.label_fraction);
  const std::vector<Tensor> masks = LoadLabeledMasks(corpus, labeled);
  std::vector<bool> is_labeled(images.size(), false);
  for (int id : labeled) is_labeled[id] = true;

  // The frozen VAE-I is deterministic at inference, so its pseudo-labels
  // are computed once per scene instead of once per batch.
  std::vector<Tensor> targets;
  for (size_t i = 0; i < images.size(); ++i) {
    targets.push_back(vae1 ? vae1::PseudoLabel(vae1::Posterior(*vae1, images[i])).values
                           : masks[i]);
  }

  const std::vector<double> epsilon2 =
      vae2::PriorSpec::Uniform(static_cast<int>(config.categorical_prior.size()),
                               config.vertices, config.epsilon)
          .epsilon2;
  const std::vector<double> xs = run.model.Columns();
  const std::vector<double> init = run.model.InitialRows();
  Adam adam(run.model.params(), config.learning_rate);
  const int n = static_cast<int>(images.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Vae2EpochLog row;
    row.epoch = epoch;
    row.sharpness = ScheduleValue(config.sharpness_start, config.sharpness_end, epoch,
                                  config.epochs);
    const std::vector<int> order = EpochOrder(n, config.seed, epoch);
    for (int start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
      const int end = std::min(n, start + config.batch_size);
      const BoundParams p(run.model.params(), true);
      ad::Var total;
      for (int j = start; j < end; ++j) {
        const int id = order[j];
        const vae2::Vae2Graph g =
            vae2::ForwardGraph(p, mc, ad::Constant(images[id]), xs, init);
        // Average the objective over K reparameterized polylines of this scene.
        ad::Var loss;
        losses::Vae2LossBreakdown parts;
        const double inv_k = 1.0 / static_cast<double>(config.samples);
        for (int k = 0; k < config.samples; ++k) {
          const uint64_t sample_seed =
              DeriveSeed({config.seed, 0x7A2, static_cast<uint64_t>(epoch),
                          static_cast<uint64_t>(id), static_cast<uint64_t>(k)});
          const ad::Var ys = vae2::ReparameterizeSample(g.mu, g.sigma2, sample_seed);
          const ad::Var rendered = render::SoftRasterize(ys, xs, mc.height, mc.width,
                                                         row.sharpness);
          losses::Vae2LossBreakdown sample_parts;
          ad::Var sample_loss = losses::Vae2Loss(targets[id], rendered, g.sigma2, epsilon2,
                                                 config.weights, &sample_parts);
          parts.ssim_term += inv_k * sample_parts.ssim_term;
          parts.mse_term += inv_k * sample_parts.mse_term;
          parts.kl_term += inv_k * sample_parts.kl_term;
          if (is_labeled[id]) {
            const ad::Var sup = ad::Scale(losses::SupervisedLoss(rendered, masks[id]),
                                          config.lambda_sup);
            row.supervised += inv_k * sup.value()[0];
            sample_loss = ad::Add(sample_loss, sup);
          }
          sample_loss = ad::Scale(sample_loss, inv_k);
          loss = loss ? ad::Add(loss, sample_loss) : sample_loss;
        }
        row.ssim_term += parts.ssim_term;
        row.mse_term += parts.mse_term;
        row.kl_term += parts.kl_term;
        row.total += loss.value()[0];
        total = total ? ad::Add(total, loss) : loss;
      }
      ad::Backward(ad::Scale(total, 1.0 / static_cast<double>(end - start)));
      adam.Step(run.model.params(), p.Gradients());
    }
    for (double* v : {&row.ssim_term, &row.mse_term, &row.kl_term, &row.supervised, &row.total}) {
      *v /= n;
    }
    run.log.push_back(row);
  }
  return run;
}

std::string EvalReport::SummaryText() const {
  std::ostringstream os;
  for (const auto& [k, v] : config_echo) os << k << " = " << v << '\n';
  os << "scenes = " << vae2_rows.size() << '\n';
  os << "metric convention = a zero denominator scores 1 when its guarded error count is 0, "
        "else 0; fscore is 0 when precision + recall = 0\n";
  if (!vae1_rows.empty()) os << SummaryLine("vae1 argmax:", vae1_summary) << '\n';
  os << SummaryLine("vae2 mean polyline:", vae2_summary) << '\n';
  os << SummaryLine("vae2 sampled polylines:", vae2_sampled) << '\n';
  os << "mean_vertex_error = " << FormatSig6(mean_vertex_error) << '\n';
  os << "uncertainty eligible = " << uncertainty.eligible
     << " excluded = " << uncertainty.excluded << " ordered = " << uncertainty.ordered
     << " ordered_fraction = " << FormatSig6(uncertainty.ordered_fraction) << '\n';
  return os.str();
}

EvalReport Evaluate(const vae1::Vae1Model* vae1, const vae2::Vae2Model& vae2,
                    const CorpusReader& corpus, const EvalOptions& options) {
  if (options.samples < 1) throw ConfigError("evaluation needs at least one sample");
  if (vae1 != nullptr) CheckDims(vae1->config().height, vae1->config().width, corpus, "VAE-I");
  CheckDims(vae2.config().height, vae2.config().width, corpus, "VAE-II");
  const int h = corpus.config().height, w = corpus.config().width;

  EvalReport report;
  report.config_echo.emplace_back("split", synth::SplitName(options.split));
  report.config_echo.emplace_back("samples", std::to_string(options.samples));
  report.config_echo.emplace_back("seed", std::to_string(options.seed));
  if (vae1 != nullptr) {
    for (auto& kv : Prefixed("vae1.", vae1->config().ToKeyValues())) {
      report.config_echo.push_back(kv);
    }
  }
  for (auto& kv : Prefixed("vae2.", vae2.config().ToKeyValues())) {
    report.config_echo.push_back(kv);
  }

  const int n = corpus.count(options.split);
  std::vector<std::vector<synth::ColumnInterval>> regions;
  std::vector<metrics::SegmentationScores> vae1_scores, vae2_scores;
  std::vector<std::vector<metrics::SegmentationScores>> sampled(
      static_cast<size_t>(options.samples));
  double vertex_error = 0.0;
  for (int i = 0; i < n; ++i) {
    const Tensor image = synth::ToChannelFirst(corpus.ReadNormals(options.split, i));
    const Tensor gt = corpus.ReadMask(options.split, i);
    const synth::BoundaryCurve curve = corpus.ReadCurve(options.split, i);
    regions.push_back(corpus.ReadNoiseRegions(options.split, i));

    if (vae1 != nullptr) {
      const auto label = vae1::PseudoLabel(vae1::Posterior(*vae1, image));
      metrics::EvalRow row;
      row.scene_id = i;
      row.scores = metrics::SegmentationMetrics(ThresholdMask(label.values), gt);
      row.noisy_sigma_mean = row.clean_sigma_mean = std::nan("");
      report.vae1_rows.push_back(row);
      vae1_scores.push_back(row.scores);
    }

    vae2::PolylineDistribution dist = vae2::Forward(vae2, image);
    const metrics::SceneUncertainty u = metrics::SceneUncertaintyStats(dist, regions.back());
    metrics::EvalRow row;
    row.scene_id = i;
    row.scores = metrics::SegmentationMetrics(render::HardRasterize(dist.mu, dist.xs, h, w), gt);
    row.noisy_sigma_mean = u.noisy_sigma_mean;
    row.clean_sigma_mean = u.clean_sigma_mean;
    report.vae2_rows.push_back(row);
    vae2_scores.push_back(row.scores);

    double err = 0.0;
    for (size_t k = 0; k < dist.size(); ++k) err += std::abs(dist.mu[k] - curve.Evaluate(dist.xs[k]));
    vertex_error += err / static_cast<double>(dist.size());

    for (int k = 0; k < options.samples; ++k) {
      const std::vector<double> ys = vae2::ReparameterizeSample(
          dist, DeriveSeed({options.seed, static_cast<uint64_t>(i), static_cast<uint64_t>(k)}));
      sampled[k].push_back(
          metrics::SegmentationMetrics(render::HardRasterize(ys, dist.xs, h, w), gt));
    }
    report.polylines.push_back(std::move(dist));
  }

  if (!vae1_scores.empty()) report.vae1_summary = metrics::SummarizeScores(vae1_scores);
  report.vae2_summary = metrics::SummarizeScores(vae2_scores);
  std::vector<metrics::SegmentationScores> sample_means;
  for (const auto& scores : sampled) {
    const metrics::ScoreSummary s = metrics::SummarizeScores(scores);
    sample_means.push_back({s.accuracy.mean, s.precision.mean, s.recall.mean, s.fscore.mean,
                            s.iou.mean});
  }
  report.vae2_sampled = metrics::SummarizeScores(sample_means);
  report.uncertainty = metrics::BuildUncertaintyReport(report.polylines, regions);
  report.mean_vertex_error = n > 0 ? vertex_error / n : 0.0;
  return report;
}

void WriteEvalReport(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "polylines");
  if (!report.vae1_rows.empty()) {
    WriteTextFile(out_dir / "vae1.csv", metrics::FormatEvalCsv(report.vae1_rows));
  }
  WriteTextFile(out_dir / "vae2.csv", metrics::FormatEvalCsv(report.vae2_rows));
  WriteTextFile(out_dir / "summary.txt", report.SummaryText());
  for (size_t i = 0; i < report.polylines.size(); ++i) {
    vae2::WritePolyline(out_dir / "polylines" / (synth::SceneDirName(static_cast<int>(i)) + ".txt"),
                        report.polylines[i]);
  }
}

std::vector<SweepRow> RunLabelSweep(const CorpusReader& corpus, const SweepOptions& options,
                                    const std::filesystem::path& out_dir) {
  for (double p : options.fractions) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sweep fractions must lie in [0, 1]");
  }
  std::vector<SweepRow> rows;
  for (double p : options.fractions) {
    for (uint64_t seed : options.seeds) {
      const std::filesystem::path leg =
          out_dir / ("p" + FormatNumber(p) + "_seed" + std::to_string(seed));
      SweepRow vae1_row{p, seed, "vae1", {}, "ok"};
      SweepRow vae2_row{p, seed, "vae2", {}, "ok"};
      try {
        std::filesystem::create_directories(leg);
        TrainConfig c1 = options.vae1;
        c1.label_fraction = p;
        c1.seed = seed;
        const Vae1Training t1 = TrainVae1(corpus, c1);
        SaveCheckpoint(leg / "vae1.ckpt", t1.model.ToCheckpoint(Prefixed("train.", c1.ToKeyValues())));
        WriteTextFile(leg / "vae1_log.csv", FormatVae1Log(t1.log));

        TrainConfig c2 = options.vae2;
        c2.label_fraction = p;
        c2.seed = seed;
        const Vae2Training t2 = TrainVae2(corpus, c2, &t1.model);
        SaveCheckpoint(leg / "vae2.ckpt", t2.model.ToCheckpoint(Prefixed("train.", c2.ToKeyValues())));
        WriteTextFile(leg / "vae2_log.csv", FormatVae2Log(t2.log));

        const EvalReport report = Evaluate(&t1.model, t2.model, corpus, options.eval);
        WriteEvalReport(report, leg / "eval");
        auto means = [](const metrics::ScoreSummary& s) {
          return metrics::SegmentationScores{s.accuracy.mean, s.precision.mean, s.recall.mean,
                                             s.fscore.mean, s.iou.mean};
        };
        vae1_row.means = means(report.vae1_summary);
        vae2_row.means = means(report.vae2_summary);
        std::clog << "sweep: p=" << FormatNumber(p) << " seed=" << seed
                  << " vae2 iou=" << FormatSig6(vae2_row.means.iou) << '\n';
      } catch (const std::exception& e) {
        const double nan = std::nan("");
        vae1_row.means = vae2_row.means = {nan, nan, nan, nan, nan};
        vae1_row.status = vae2_row.status = "failed: " + Sanitize(e.what());
        std::clog << "sweep: p=" << FormatNumber(p) << " seed=" << seed
                  << " failed: " << e.what() << '\n';
      }
      rows.push_back(vae1_row);
      rows.push_back(vae2_row);
    }
  }
  WriteTextFile(out_dir / "sweep.csv", FormatSweepCsv(rows));
  WriteSweepPlots(rows, out_dir / "plots");
  return rows;
}

std::string FormatSweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "p,seed,model,accuracy,precision,recall,fscore,iou,status\n";
  for (const auto& r : rows) {
    os << FormatNumber(r.fraction) << ',' << r.seed << ',' << r.model << ','
       << FormatSig6(r.means.accuracy) << ',' << FormatSig6(r.means.precision) << ','
       << FormatSig6(r.means.recall) << ',' << FormatSig6(r.means.fscore) << ','
       << FormatSig6(r.means.iou) << ',' << Sanitize(r.status) << '\n';
  }
  return os.str();
}

std::vector<SweepRow> ParseSweepCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("p,seed,model,", 0) != 0) {
    throw IoError("sweep csv: missing header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw IoError("sweep csv: expected 9 fields in '" + line + "'");
    auto num = [](const std::string& s) {
      return s == "nan" ? std::nan("") : ParseDoubleValue(s, "sweep csv");
    };
    SweepRow r;
    r.fraction = num(f[0]);
    r.seed = static_cast<uint64_t>(ParseIntValue(f[1], "seed"));
    r.model = f[2];
    r.means = {num(f[3]), num(f[4]), num(f[5]), num(f[6]), num(f[7])};
    r.status = f[8];
    rows.push_back(r);
  }
  return rows;
}

void WriteSweepPlots(const std::vector<SweepRow>& rows, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<double> fractions;
  std::vector<std::string> models;
  for (const auto& r : rows) {
    if (std::find(fractions.begin(), fractions.end(), r.fraction) == fractions.end()) {
      fractions.push_back(r.fraction);
    }
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }
  std::sort(fractions.begin(), fractions.end());
  const std::vector<std::pair<std::string, double metrics::SegmentationScores::*>> fields = {
      {"accuracy", &metrics::SegmentationScores::accuracy},
      {"precision", &metrics::SegmentationScores::precision},
      {"recall", &metrics::SegmentationScores::recall},
      {"fscore", &metrics::SegmentationScores::fscore},
      {"iou", &metrics::SegmentationScores::iou}};
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  const double width = 480, height = 320, left = 60, right = 110, top = 30, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  // Fractions are placed at evenly spaced categorical positions.
  auto px = [&](size_t i) {
    return fractions.size() > 1 ? left + plot_w * i / (fractions.size() - 1) : left + plot_w / 2;
  };
  auto py = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

  for (const auto& [name, field] : fields) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"18\" text-anchor=\"middle\" "
        << "font-size=\"13\">" << name << " vs label fraction</text>\n";
    for (int t = 0; t <= 5; ++t) {
      const double v = t / 5.0;
      svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(v)
          << "\" y2=\"" << py(v) << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
          << FormatNumber(v) << "</text>\n";
    }
    for (size_t i = 0; i < fractions.size(); ++i) {
      svg << "<text x=\"" << px(i) << "\" y=\"" << top + plot_h + 16
          << "\" text-anchor=\"middle\">" << FormatNumber(fractions[i]) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">label fraction p</text>\n";
    for (size_t m = 0; m < models.size(); ++m) {
      const char* color = colors[m % 4];
      std::ostringstream points;
      for (size_t i = 0; i < fractions.size(); ++i) {
        std::vector<double> values;
        for (const auto& r : rows) {
          const double v = r.means.*field;
          if (r.model == models[m] && r.fraction == fractions[i] && r.status == "ok" &&
              std::isfinite(v)) {
            values.push_back(v);
          }
        }
        if (values.empty()) continue;
        const metrics::MeanStd s = metrics::Summarize(values);
        points << px(i) << ',' << py(s.mean) << ' ';
        svg << "<line x1=\"" << px(i) << "\" x2=\"" << px(i) << "\" y1=\""
            << py(s.mean - s.std) << "\" y2=\"" << py(s.mean + s.std) << "\" stroke=\""
            << color << "\"/>\n";
        svg << "<circle cx=\"" << px(i) << "\" cy=\"" << py(s.mean) << "\" r=\"3\" fill=\""
            << color << "\"/>\n";
      }
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << points.str()
          << "\"/>\n";
      svg << "<text x=\"" << left + plot_w + 12 << "\" y=\"" << top + 14 + 16 * m
          << "\" fill=\"" << color << "\">" << models[m] << "</text>\n";
    }
    svg << "</svg>\n";
    WriteTextFile(out_dir / (name + ".svg"), svg.str());
  }
}

}  // namespace navseg::pipeline
