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

// Command-line front end: corpus generation, training, evaluation, sweeps
// and plotting.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "navseg/checkpoint.h"
#include "navseg/errors.h"
#include "navseg/kv.h"
#include "navseg/pipeline.h"
#include "navseg/synthdata.h"
#include "navseg/ten_io.h"

namespace {

namespace fs = std::filesystem;
using navseg::pipeline::TrainConfig;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitEval = 4;

navseg::KeyValueList TrainEcho(const TrainConfig& config) {
  navseg::KeyValueList out;
  for (const auto& [k, v] : config.ToKeyValues()) out.emplace_back("train." + k, v);
  return out;
}

std::string DefaultLogPath(const std::string& ckpt, const std::string& log) {
  return log.empty() ? ckpt + ".log.csv" : log;
}

void ReportAudit(const navseg::synth::CorpusReader& corpus) {
  std::clog << "ground-truth reads during training: " << corpus.audit_log().size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navseg: two-stage variational navigable-space segmentation"};
  app.require_subcommand(1);

  // gen
  navseg::synth::CorpusConfig gen_config;
  std::string gen_out;
  bool gen_overwrite = false;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--out", gen_out, "Corpus root directory")->required();
  gen->add_option("--scenes", gen_config.n_train, "Training scenes")->check(CLI::NonNegativeNumber);
  gen->add_option("--test", gen_config.n_test, "Test scenes")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_config.seed, "Corpus seed");
  gen->add_option("--height", gen_config.height, "Image height")->check(CLI::PositiveNumber);
  gen->add_option("--width", gen_config.width, "Image width")->check(CLI::PositiveNumber);
  gen->add_option("--noise-base", gen_config.noise.base, "Perturbation std outside noise regions");
  gen->add_option("--noise-amp", gen_config.noise.amplification, "Noise-region amplification");
  gen->add_option("--fraction", gen_config.label_fraction, "Label fraction recorded in the manifest")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--overwrite", gen_overwrite, "Replace an existing corpus");

  // train-vae1
  std::string corpus_dir, config_path, out_path, log_path, vae1_path, vae2_path;
  auto* t1 = app.add_subcommand("train-vae1", "Train the categorical VAE");
  t1->add_option("--corpus", corpus_dir, "Corpus root")->required();
  t1->add_option("--config", config_path, "key = value training config")->required();
  t1->add_option("--out", out_path, "Output checkpoint")->required();
  t1->add_option("--log", log_path, "Per-epoch CSV log (default <out>.log.csv)");

  // train-vae2
  auto* t2 = app.add_subcommand("train-vae2", "Train the polyline VAE against VAE-I pseudo-labels");
  t2->add_option("--corpus", corpus_dir, "Corpus root")->required();
  t2->add_option("--vae1", vae1_path, "Frozen VAE-I checkpoint (optional when label_fraction = 1)");
  t2->add_option("--config", config_path, "key = value training config")->required();
  t2->add_option("--out", out_path, "Output checkpoint")->required();
  t2->add_option("--log", log_path, "Per-epoch CSV log (default <out>.log.csv)");

  // eval
  std::string split_name = "test";
  navseg::pipeline::EvalOptions eval_options;
  std::optional<double> min_accuracy;
  auto* ev = app.add_subcommand("eval", "Evaluate both models on a split");
  ev->add_option("--corpus", corpus_dir, "Corpus root")->required();
  ev->add_option("--vae1", vae1_path, "VAE-I checkpoint")->required();
  ev->add_option("--vae2", vae2_path, "VAE-II checkpoint")->required();
  ev->add_option("--split", split_name, "train or test");
  ev->add_option("--out", out_path, "Report directory")->required();
  ev->add_option("--samples", eval_options.samples, "Sampled polylines per scene")
      ->check(CLI::PositiveNumber);
  ev->add_option("--min-accuracy", min_accuracy,
                 "Exit with status 4 when the VAE-II mean accuracy falls below this");

  // sweep
  std::string fractions_text = "0,0.01,0.3,1.0", seeds_text = "1,2,3";
  std::string vae1_config_path, vae2_config_path;
  auto* sw = app.add_subcommand("sweep", "Label-fraction sweep over seeds");
  sw->add_option("--corpus", corpus_dir, "Corpus root")->required();
  sw->add_option("--fractions", fractions_text, "Comma-separated label fractions");
  sw->add_option("--seeds", seeds_text, "Comma-separated training seeds");
  sw->add_option("--out", out_path, "Sweep directory")->required();
  sw->add_option("--vae1-config", vae1_config_path, "VAE-I training config");
  sw->add_option("--vae2-config", vae2_config_path, "VAE-II training config");

  // plot
  std::string report_dir;
  auto* pl = app.add_subcommand("plot", "Render sweep curves as SVG");
  pl->add_option("--report", report_dir, "Sweep directory holding sweep.csv")->required();
  pl->add_option("--out", out_path, "Plot directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      navseg::synth::BuildCorpus(gen_config, gen_out, gen_overwrite);
      std::cout << "wrote corpus to " << gen_out << '\n';
    } else if (t1->parsed()) {
      const TrainConfig config = TrainConfig::Load(config_path);
      const navseg::synth::CorpusReader corpus(corpus_dir);
      const auto run = navseg::pipeline::TrainVae1(corpus, config);
      navseg::SaveCheckpoint(out_path, run.model.ToCheckpoint(TrainEcho(config)));
      navseg::WriteTextFile(DefaultLogPath(out_path, log_path),
                            navseg::pipeline::FormatVae1Log(run.log));
      ReportAudit(corpus);
      std::cout << "final loss " << navseg::FormatSig6(run.log.back().total) << '\n';
    } else if (t2->parsed()) {
      const TrainConfig config = TrainConfig::Load(config_path);
      const navseg::synth::CorpusReader corpus(corpus_dir);
      std::optional<navseg::vae1::Vae1Model> vae1;
      if (!vae1_path.empty()) {
        vae1.emplace(navseg::vae1::Vae1Model::FromCheckpoint(navseg::LoadCheckpoint(vae1_path)));
      }
      const auto run = navseg::pipeline::TrainVae2(corpus, config, vae1 ? &*vae1 : nullptr);
      navseg::SaveCheckpoint(out_path, run.model.ToCheckpoint(TrainEcho(config)));
      navseg::WriteTextFile(DefaultLogPath(out_path, log_path),
                            navseg::pipeline::FormatVae2Log(run.log));
      ReportAudit(corpus);
      std::cout << "final loss " << navseg::FormatSig6(run.log.back().total) << '\n';
    } else if (ev->parsed()) {
      eval_options.split = navseg::synth::ParseSplit(split_name);
      const navseg::synth::CorpusReader corpus(corpus_dir);
      const auto vae1 = navseg::vae1::Vae1Model::FromCheckpoint(navseg::LoadCheckpoint(vae1_path));
      const auto vae2 = navseg::vae2::Vae2Model::FromCheckpoint(navseg::LoadCheckpoint(vae2_path));
      const auto report = navseg::pipeline::Evaluate(&vae1, vae2, corpus, eval_options);
      navseg::pipeline::WriteEvalReport(report, out_path);
      std::cout << report.SummaryText();
      if (min_accuracy && !(report.vae2_summary.accuracy.mean >= *min_accuracy)) {
        std::cerr << "accuracy " << report.vae2_summary.accuracy.mean << " below "
                  << *min_accuracy << '\n';
        return kExitEval;
      }
    } else if (sw->parsed()) {
      navseg::pipeline::SweepOptions options;
      options.fractions = navseg::ParseDoubleList(fractions_text, "--fractions");
      options.seeds.clear();
      for (int64_t s : navseg::ParseIntList(seeds_text, "--seeds")) {
        options.seeds.push_back(static_cast<uint64_t>(s));
      }
      if (!vae1_config_path.empty()) options.vae1 = TrainConfig::Load(vae1_config_path);
      if (!vae2_config_path.empty()) options.vae2 = TrainConfig::Load(vae2_config_path);
      const navseg::synth::CorpusReader corpus(corpus_dir);
      const auto rows = navseg::pipeline::RunLabelSweep(corpus, options, out_path);
      std::cout << navseg::pipeline::FormatSweepCsv(rows);
    } else if (pl->parsed()) {
      const auto rows = navseg::pipeline::ParseSweepCsv(
          navseg::ReadTextFile(fs::path(report_dir) / "sweep.csv"));
      navseg::pipeline::WriteSweepPlots(rows, out_path);
      std::cout << "wrote plots to " << out_path << '\n';
    }
  } catch (const navseg::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const navseg::InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const navseg::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
