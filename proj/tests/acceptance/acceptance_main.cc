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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. The sweep legs take most of the
// runtime; everything else finishes in well under a minute.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "CLI11.hpp"
#include "navseg/checkpoint.h"
#include "navseg/losses.h"
#include "navseg/metrics.h"
#include "navseg/pipeline.h"
#include "navseg/renderer.h"
#include "navseg/rng.h"
#include "navseg/synthdata.h"
#include "navseg/ten_io.h"
#include "navseg/vae1.h"
#include "navseg/vae2.h"

namespace navseg {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double RelativeError(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// 1. Closed-form Gaussian KL against adaptive quadrature of the integral.
Outcome CheckPriorKl() {
  using boost::math::quadrature::gauss_kronrod;
  const auto start = Clock::now();
  const double grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  const double inf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double sigma : grid) {
    for (double eps : grid) {
      auto log_pdf = [](double y, double sd) {
        return -std::log(sd * std::sqrt(2 * std::numbers::pi)) - y * y / (2 * sd * sd);
      };
      auto integrand = [&](double y) {
        const double lp = log_pdf(y, sigma);
        return std::exp(lp) * (lp - log_pdf(y, eps));
      };
      const double numeric = gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 15, 1e-13);
      const double closed = vae2::GaussianPriorKl(std::vector<double>{sigma * sigma},
                                                  std::vector<double>{eps * eps});
      worst = std::max(worst, std::abs(closed - numeric));
    }
  }
  const double secs = Seconds(start);
  return {worst <= 1e-6 && secs < 5.0,
          "25 pairs, max |closed - quadrature| = " + Fmt(worst) + ", " + Fmt(secs) + " s"};
}

// 2. Analytic renderer gradient against central differences, s = 1.
Outcome CheckRendererGradient() {
  const auto start = Clock::now();
  const int h = 64, w = 96, n = 16;
  const std::vector<double> xs = render::EvenColumns(n, w);
  Rng rng = MakeRng({0xACC2});
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> ys(n);
    for (double& y : ys) y = UniformIn(rng, 4.0, h - 4.0);
    // A random linear functional of R2 exercises every pixel's derivative.
    Tensor weights({h, w});
    for (double& v : weights.values()) v = UniformIn(rng, -1.0, 1.0);
    auto functional = [&](const std::vector<double>& y) {
      const Tensor r = render::SoftRasterize(y, xs, h, w, 1.0).values;
      double total = 0.0;
      for (size_t i = 0; i < r.size(); ++i) total += weights[i] * r[i];
      return total;
    };
    const std::vector<double> grad = render::SoftRasterizeBackward(weights, ys, xs, h, w, 1.0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> up = ys, down = ys;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double numeric = (functional(up) - functional(down)) / 2e-6;
      worst = std::max(worst, RelativeError(grad[i], numeric, 1e-6));
    }
  }
  const double secs = Seconds(start);
  return {worst < 1e-3 && secs < 30.0,
          "100 polylines, max relative error = " + Fmt(worst) + ", " + Fmt(secs) + " s"};
}

Tensor SceneImage(uint64_t corpus_seed, int index) {
  synth::CorpusConfig c;
  c.seed = corpus_seed;
  return synth::ToChannelFirst(synth::GenerateScene(c, synth::Split::kTrain, index).normals);
}

// Central-difference check of `loss` on 20 scalar parameters picked
// uniformly from the whole store.
template <typename LossFn>
double WorstParamGradientError(ParamStore& store, const std::vector<Tensor>& grads,
                               LossFn loss, uint64_t seed) {
  Rng rng = MakeRng({seed});
  const size_t total = store.NumScalars();
  double worst = 0.0;
  for (int pick = 0; pick < 20; ++pick) {
    size_t flat = std::min(total - 1, static_cast<size_t>(UniformOpen(rng) * total));
    size_t t = 0;
    while (flat >= store.tensor(t).size()) flat -= store.tensor(t++).size();
    double& v = store.tensor(t)[flat];
    const double orig = v;
    v = orig + 1e-6;
    const double up = loss();
    v = orig - 1e-6;
    const double down = loss();
    v = orig;
    worst = std::max(worst, RelativeError(grads[t][flat], (up - down) / 2e-6, 1e-6));
  }
  return worst;
}

// 3. Both training objectives against finite differences.
Outcome CheckLossGradients() {
  const auto start = Clock::now();
  // Stage one objective on a batch of two scenes with K = 2 relaxed samples.
  vae1::Vae1Model m1(vae1::Vae1Config{}, 31);
  m1.params().Get("log_sigma2")[0] = 0.4;
  const std::vector<Tensor> batch = {SceneImage(1, 0), SceneImage(1, 1)};
  vae1::Vae1LossOptions o1;
  o1.samples = 2;
  o1.tau = 0.7;
  o1.seed = 5;
  std::vector<Tensor> g1;
  {
    const BoundParams p(m1.params(), true);
    ad::Backward(vae1::Vae1LossGraph(p, m1.config(), batch, o1));
    g1 = p.Gradients();
  }
  const double e1 = WorstParamGradientError(
      m1.params(), g1, [&] { return vae1::Vae1Loss(m1, batch, o1).total; }, 0xACC31);

  // Stage two objective: reparameterized sample, soft render, weighted loss.
  vae2::Vae2Model m2(vae2::Vae2Config{}, 32);
  const vae2::Vae2Config& c2 = m2.config();
  const Tensor image = SceneImage(1, 2);
  Tensor target({c2.height, c2.width});
  {
    const synth::CorpusConfig cc;
    target = synth::GenerateScene(cc, synth::Split::kTrain, 2).mask;
  }
  const std::vector<double> xs = m2.Columns(), init = m2.InitialRows();
  const std::vector<double> eps2(xs.size(), 4.0);
  auto graph = [&](const BoundParams& p) {
    const vae2::Vae2Graph g = vae2::ForwardGraph(p, c2, ad::Constant(image), xs, init);
    const ad::Var ys = vae2::ReparameterizeSample(g.mu, g.sigma2, 77);
    const ad::Var r = render::SoftRasterize(ys, xs, c2.height, c2.width, 1.0);
    return losses::Vae2Loss(target, r, g.sigma2, eps2, losses::LossWeights{});
  };
  std::vector<Tensor> g2;
  {
    const BoundParams p(m2.params(), true);
    ad::Backward(graph(p));
    g2 = p.Gradients();
  }
  const double e2 = WorstParamGradientError(
      m2.params(), g2,
      [&] {
        const BoundParams p(m2.params(), false);
        return graph(p).value()[0];
      },
      0xACC32);
  const double secs = Seconds(start);
  return {e1 < 1e-3 && e2 < 1e-3 && secs < 120.0,
          "max relative error vae1 = " + Fmt(e1) + ", vae2 = " + Fmt(e2) + ", " + Fmt(secs) +
              " s"};
}

// 7. Monte Carlo checks of both samplers, 10^4 draws each at one site.
Outcome CheckSamplers() {
  const int draws = 10000;
  const Tensor logits({2, 1, 1}, 0.0);
  int class0 = 0;
  for (int s = 0; s < draws; ++s) {
    const Tensor z = vae1::GumbelSoftmaxSample(logits, 1.0, DeriveSeed({0xACC7, static_cast<uint64_t>(s)}));
    class0 += z[0] > z[1];
  }
  const double freq = static_cast<double>(class0) / draws;
  const double bound = 3 * std::sqrt(0.25 / draws);
  const bool gumbel_ok = std::abs(freq - 0.5) <= bound;

  vae2::PolylineDistribution d;
  d.xs = {0.0};
  d.mu = {30.0};
  d.sigma2 = {4.0};
  d.init_ys = {30.0};
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < draws; ++s) {
    const double y = vae2::ReparameterizeSample(d, DeriveSeed({0xACC8, static_cast<uint64_t>(s)}))[0];
    sum += y;
    sq += y * y;
  }
  const double mean = sum / draws;
  const double var = (sq - draws * mean * mean) / (draws - 1);
  const bool gauss_ok = std::abs(mean - 30.0) <= 0.06 && std::abs(var - 4.0) <= 0.2;
  return {gumbel_ok && gauss_ok, "class-0 frequency " + Fmt(freq) + " (bound 0.5 +- " +
                                     Fmt(bound) + "), sample mean " + Fmt(mean) +
                                     ", sample variance " + Fmt(var)};
}

// 9. Metrics against an independent per-pixel counting oracle.
Outcome CheckMetricOracle() {
  Rng rng = MakeRng({0xACC9});
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = 1 + static_cast<int>(UniformOpen(rng) * 20);
    const int w = 1 + static_cast<int>(UniformOpen(rng) * 20);
    const double p_pred = UniformOpen(rng), p_gt = UniformOpen(rng);
    Tensor pred({h, w}), gt({h, w});
    for (size_t i = 0; i < pred.size(); ++i) {
      pred[i] = UniformOpen(rng) < p_pred ? 1.0 : 0.0;
      gt[i] = UniformOpen(rng) < p_gt ? 1.0 : 0.0;
    }
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const bool a = pred.at(v, u) == 1.0, b = gt.at(v, u) == 1.0;
        tp += a && b;
        fp += a && !b;
        fn += !a && b;
        tn += !a && !b;
      }
    }
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(h * w);
    const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : (fn == 0 ? 1.0 : 0.0);
    const double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : (fp == 0 ? 1.0 : 0.0);
    const double f = prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    const double iou = tp + fp + fn > 0 ? static_cast<double>(tp) / (tp + fp + fn) : 1.0;
    const metrics::SegmentationScores got = metrics::SegmentationMetrics(pred, gt);
    const metrics::Confusion c = metrics::CountConfusion(pred, gt);
    const bool same = c == metrics::Confusion{tp, fp, fn, tn} && got.accuracy == acc &&
                      got.precision == prec && got.recall == rec && got.fscore == f &&
                      got.iou == iou;
    mismatches += !same;
  }
  return {mismatches == 0, "1000 random mask pairs, " + std::to_string(mismatches) + " mismatches"};
}

bool SameTree(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (files.size() != count_b) {
    *why = "file counts differ";
    return false;
  }
  for (const fs::path& rel : files) {
    if (!fs::exists(b / rel) || ReadFileBytes(a / rel) != ReadFileBytes(b / rel)) {
      *why = rel.string() + " differs";
      return false;
    }
  }
  *why = std::to_string(files.size()) + " files identical";
  return true;
}

int CountTrainReads(const synth::CorpusReader& corpus) {
  const std::string prefix = (corpus.root() / synth::SplitName(synth::Split::kTrain)).string() + "/";
  int n = 0;
  for (const std::string& path : corpus.audit_log()) n += path.rfind(prefix, 0) == 0;
  return n;
}

double MeanIou(const std::vector<pipeline::SweepRow>& rows, double p) {
  double total = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.model == "vae2" && r.fraction == p) {
      total += r.means.iou;
      ++n;
    }
  }
  return n > 0 ? total / n : std::nan("");
}

int Run(const fs::path& workdir, const fs::path& configs) {
  std::error_code ec;
  fs::remove_all(workdir, ec);
  fs::create_directories(workdir);
  std::vector<Outcome> results(10);

  std::clog << "acceptance: oracle checks\n";
  results[1] = CheckPriorKl();
  results[2] = CheckRendererGradient();
  results[3] = CheckLossGradients();
  results[7] = CheckSamplers();
  results[9] = CheckMetricOracle();

  std::clog << "acceptance: building corpora\n";
  const synth::CorpusConfig corpus_config;  // 200 train / 40 test, 64x96, seed 1
  synth::BuildCorpus(corpus_config, workdir / "corpus", false);
  synth::BuildCorpus(corpus_config, workdir / "corpus_repeat", false);
  std::string corpus_why;
  const bool corpus_same = SameTree(workdir / "corpus", workdir / "corpus_repeat", &corpus_why);

  pipeline::SweepOptions sweep;
  sweep.vae1 = pipeline::TrainConfig::Load(configs / "vae1.cfg");
  sweep.vae2 = pipeline::TrainConfig::Load(configs / "vae2.cfg");
  const fs::path sweep_dir = workdir / "sweep";
  std::vector<pipeline::SweepRow> rows;
  auto run_part = [&](std::vector<double> fractions, std::vector<uint64_t> seeds,
                      const synth::CorpusReader& reader) {
    pipeline::SweepOptions part = sweep;
    part.fractions = std::move(fractions);
    part.seeds = std::move(seeds);
    const auto got = pipeline::RunLabelSweep(reader, part, sweep_dir);
    rows.insert(rows.end(), got.begin(), got.end());
  };

  // The p = 0 legs run on their own readers so that their audit logs hold
  // nothing but the evaluation reads of the test split.
  std::clog << "acceptance: unsupervised reference leg\n";
  const synth::CorpusReader reference_reader(workdir / "corpus");
  const auto leg_start = Clock::now();
  run_part({0.0}, {1}, reference_reader);
  const double leg_secs = Seconds(leg_start);
  const synth::CorpusReader p0_reader(workdir / "corpus");
  const auto sweep_start = Clock::now();
  run_part({0.0}, {2, 3}, p0_reader);
  const int train_reads = CountTrainReads(reference_reader) + CountTrainReads(p0_reader);
  std::clog << "acceptance: labeled legs\n";
  const synth::CorpusReader labeled_reader(workdir / "corpus");
  run_part({0.01, 0.3, 1.0}, {1, 2, 3}, labeled_reader);
  const double sweep_secs = leg_secs + Seconds(sweep_start);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.fraction, a.seed, a.model) < std::tie(b.fraction, b.seed, b.model);
  });
  WriteTextFile(sweep_dir / "sweep.csv", pipeline::FormatSweepCsv(rows));
  pipeline::WriteSweepPlots(rows, sweep_dir / "plots");

  // 4 and 6 use the p = 0, seed 1 leg, re-evaluated from its checkpoints.
  const fs::path leg = sweep_dir / "p0_seed1";
  bool leg_ok = true;
  for (const auto& r : rows) leg_ok = leg_ok && (r.fraction != 0.0 || r.seed != 1 || r.status == "ok");
  if (!leg_ok) {
    results[4] = {false, "reference leg failed, see sweep.csv"};
    results[6] = results[4];
    results[8] = {false, "reference leg failed"};
  } else {
    const synth::CorpusReader reader(workdir / "corpus");
    const vae1::Vae1Model v1 = vae1::Vae1Model::FromCheckpoint(LoadCheckpoint(leg / "vae1.ckpt"));
    const vae2::Vae2Model v2 = vae2::Vae2Model::FromCheckpoint(LoadCheckpoint(leg / "vae2.ckpt"));
    const pipeline::EvalReport report = pipeline::Evaluate(&v1, v2, reader, sweep.eval);
    const pipeline::EvalReport again = pipeline::Evaluate(&v1, v2, reader, sweep.eval);

    const double acc = report.vae2_summary.accuracy.mean, iou = report.vae2_summary.iou.mean;
    results[4] = {acc >= 0.90 && iou >= 0.80 && leg_secs <= 1800.0,
                  "accuracy " + Fmt(acc) + ", IoU " + Fmt(iou) + ", vertex error " +
                      Fmt(report.mean_vertex_error) + " px, leg " + Fmt(leg_secs) + " s"};

    int eligible = 0, ordered = 0;
    for (const auto& s : report.uncertainty.scenes) {
      if (!s.eligible() || eligible == 20) continue;
      ++eligible;
      ordered += s.noisy_sigma_mean > s.clean_sigma_mean;
    }
    const double frac = eligible > 0 ? static_cast<double>(ordered) / eligible : 0.0;
    results[6] = {eligible == 20 && frac >= 0.80,
                  std::to_string(ordered) + " of " + std::to_string(eligible) +
                      " eligible scenes ordered (" + Fmt(frac) + ")"};

    const std::string csv1 = metrics::FormatEvalCsv(report.vae1_rows);
    const std::string csv2 = metrics::FormatEvalCsv(report.vae2_rows);
    const bool repeat_same = csv1 == metrics::FormatEvalCsv(again.vae1_rows) &&
                             csv2 == metrics::FormatEvalCsv(again.vae2_rows);
    const bool ckpt_same = csv1 == ReadTextFile(leg / "eval" / "vae1.csv") &&
                           csv2 == ReadTextFile(leg / "eval" / "vae2.csv");
    results[8] = {corpus_same && repeat_same && ckpt_same && train_reads == 0,
                  "corpus " + corpus_why + "; repeated eval " +
                      (repeat_same ? "identical" : "differs") + "; checkpoint round trip " +
                      (ckpt_same ? "identical" : "differs") + "; " +
                      std::to_string(train_reads) + " ground-truth reads in p=0 training"};
  }

  const double iou0 = MeanIou(rows, 0.0), iou03 = MeanIou(rows, 0.3), iou1 = MeanIou(rows, 1.0);
  results[5] = {iou1 >= iou0 && iou03 >= iou0 - 0.01 && sweep_secs <= 4 * 3600.0,
                "mean IoU p=0 " + Fmt(iou0) + ", p=0.01 " + Fmt(MeanIou(rows, 0.01)) +
                    ", p=0.3 " + Fmt(iou03) + ", p=1 " + Fmt(iou1) + ", sweep " +
                    Fmt(sweep_secs) + " s"};

  bool all = true;
  for (int i = 1; i <= 9; ++i) {
    std::cout << "criterion " << i << ": " << (results[i].pass ? "PASS" : "FAIL") << " ("
              << results[i].detail << ")\n";
    all = all && results[i].pass;
  }
  return all ? 0 : 4;
}

}  // namespace
}  // namespace navseg

int main(int argc, char** argv) {
  CLI::App app{"navseg acceptance run"};
  std::string workdir, configs;
  app.add_option("--workdir", workdir, "Scratch directory (wiped first)")->required();
  app.add_option("--configs", configs, "Directory holding vae1.cfg and vae2.cfg")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    return navseg::Run(workdir, configs);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 4;
  }
}
