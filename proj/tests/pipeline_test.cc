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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "navseg/checkpoint.h"
#include "navseg/errors.h"
#include "navseg/pipeline.h"
#include "navseg/synthdata.h"
#include "navseg/ten_io.h"
#include "test_util.h"

namespace navseg::pipeline {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::ScopedTempDir;
    synth::CorpusConfig c;
    c.n_train = 6;
    c.n_test = 3;
    c.height = 32;
    c.width = 48;
    c.seed = 4;
    synth::BuildCorpus(c, dir_->path() / "corpus", false);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static synth::CorpusReader Corpus() { return synth::CorpusReader(dir_->path() / "corpus"); }

  static TrainConfig Tiny(const std::string& stage) {
    TrainConfig c;
    c.stage = stage;
    c.epochs = 2;
    c.batch_size = 2;
    c.learning_rate = 1e-2;
    c.vertices = 4;
    c.vae1_hidden = 2;
    c.vae2_channels = 2;
    c.gcn_layers = 1;
    c.gcn_hidden = 4;
    return c;
  }

  static testing::ScopedTempDir* dir_;
};

testing::ScopedTempDir* PipelineTest::dir_ = nullptr;

TEST(TrainConfigTest, ParsesKnownKeysAndRoundTrips) {
  const TrainConfig c = TrainConfig::Parse(
      "# comment\nstage = vae2\nepochs = 7\nlambda1 = 0.5\nlambda2 = 0.4\nlambda3 = 0.1\n"
      "categorical_prior = 0.3, 0.7\nsamples = 3\n");
  EXPECT_EQ(c.stage, "vae2");
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.samples, 3);
  EXPECT_DOUBLE_EQ(c.weights.lambda2, 0.4);
  EXPECT_EQ(c.categorical_prior, (std::vector<double>{0.3, 0.7}));
  const TrainConfig back = TrainConfig::FromKeyValues(c.ToKeyValues());
  EXPECT_EQ(back.ToKeyValues(), c.ToKeyValues());
}

TEST(TrainConfigTest, DefaultWeightsSumToOne) {
  const TrainConfig c;
  EXPECT_NEAR(c.weights.lambda1 + c.weights.lambda2 + c.weights.lambda3, 1.0, 1e-15);
}

TEST(TrainConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(TrainConfig::Parse("epoch = 3\n"), ConfigError);
  EXPECT_THROW(TrainConfig::Parse("epochs = 0\n"), ConfigError);
  EXPECT_THROW(TrainConfig::Parse("stage = vae3\n"), ConfigError);
  EXPECT_THROW(TrainConfig::Parse("lambda1 = 0.9\n"), ConfigError);
  EXPECT_THROW(TrainConfig::Parse("label_fraction = 1.5\n"), ConfigError);
  EXPECT_THROW(TrainConfig::Parse("epsilon = -1\n"), ConfigError);
}

TEST(ScheduleTest, GeometricInterpolation) {
  EXPECT_DOUBLE_EQ(ScheduleValue(1.0, 0.3, 0, 10), 1.0);
  EXPECT_NEAR(ScheduleValue(1.0, 0.3, 9, 10), 0.3, 1e-15);
  EXPECT_NEAR(ScheduleValue(1.0, 0.25, 1, 3), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(ScheduleValue(2.0, 0.5, 0, 1), 2.0);
}

TEST_F(PipelineTest, Vae1TrainingReducesLossAndReadsNoMasksWithoutLabels) {
  const synth::CorpusReader corpus = Corpus();
  TrainConfig c = Tiny("vae1");
  c.epochs = 6;
  const Vae1Training t = TrainVae1(corpus, c);
  ASSERT_EQ(t.log.size(), 6u);
  EXPECT_LT(t.log.back().total, t.log.front().total);
  EXPECT_TRUE(corpus.audit_log().empty());
  EXPECT_DOUBLE_EQ(t.log.front().tau, 1.0);
  EXPECT_NEAR(t.log.back().tau, 0.3, 1e-12);
  const std::string csv = FormatVae1Log(t.log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,tau,kl,recon,logvar,supervised,total,sigma2");
}

TEST_F(PipelineTest, TrainingIsDeterministic) {
  const synth::CorpusReader corpus = Corpus();
  const TrainConfig c = Tiny("vae1");
  EXPECT_EQ(TrainVae1(corpus, c).model.params(), TrainVae1(corpus, c).model.params());
  TrainConfig other = c;
  other.seed = 2;
  EXPECT_FALSE(TrainVae1(corpus, c).model.params() == TrainVae1(corpus, other).model.params());
}

TEST_F(PipelineTest, LabeledRunsReadOnlyTheirSubset) {
  const synth::CorpusReader corpus = Corpus();
  TrainConfig c = Tiny("vae1");
  c.epochs = 1;
  c.label_fraction = 0.5;
  const std::vector<int> labels = TrainingLabels(corpus, 0.5);
  EXPECT_EQ(labels.size(), 3u);
  const Vae1Training t = TrainVae1(corpus, c);
  EXPECT_EQ(corpus.audit_log().size(), labels.size());
  EXPECT_GT(t.log.front().supervised, 0.0);
}

TEST_F(PipelineTest, Vae2WithoutVae1NeedsFullSupervision) {
  const synth::CorpusReader corpus = Corpus();
  TrainConfig c = Tiny("vae2");
  c.label_fraction = 0.3;
  EXPECT_THROW(TrainVae2(corpus, c, nullptr), ConfigError);
  c.label_fraction = 1.0;
  c.epochs = 1;
  EXPECT_NO_THROW(TrainVae2(corpus, c, nullptr));
  EXPECT_THROW(TrainVae2(corpus, Tiny("vae1"), nullptr), ConfigError);
}

TEST_F(PipelineTest, StageTwoLeavesTheVae1CheckpointUntouched) {
  const synth::CorpusReader corpus = Corpus();
  const fs::path ckpt = dir_->path() / "isolation_vae1.ckpt";
  SaveCheckpoint(ckpt, TrainVae1(corpus, Tiny("vae1")).model.ToCheckpoint({}));
  const std::vector<uint8_t> before = ReadFileBytes(ckpt);
  const vae1::Vae1Model frozen = vae1::Vae1Model::FromCheckpoint(LoadCheckpoint(ckpt));
  const vae1::Vae1Model copy = frozen;
  const Vae2Training t = TrainVae2(corpus, Tiny("vae2"), &frozen);
  EXPECT_EQ(t.log.size(), 2u);
  EXPECT_EQ(frozen.params(), copy.params());
  EXPECT_EQ(ReadFileBytes(ckpt), before);
  EXPECT_TRUE(corpus.audit_log().empty());
}

TEST_F(PipelineTest, PurePriorWeightCollapsesTheVarianceTerm) {
  const synth::CorpusReader corpus = Corpus();
  const vae1::Vae1Model v1 = TrainVae1(corpus, Tiny("vae1")).model;
  TrainConfig c = Tiny("vae2");
  c.weights = {0.0, 0.0, 1.0};
  c.epochs = 15;
  const Vae2Training t = TrainVae2(corpus, c, &v1);
  EXPECT_LT(t.log.back().kl_term, 1e-3);
}

TEST_F(PipelineTest, EvaluationIsReproducibleAndSurvivesCheckpointing) {
  const synth::CorpusReader corpus = Corpus();
  const vae1::Vae1Model v1 = TrainVae1(corpus, Tiny("vae1")).model;
  const vae2::Vae2Model v2 = TrainVae2(corpus, Tiny("vae2"), &v1).model;
  EvalOptions o;
  o.samples = 3;
  const EvalReport a = Evaluate(&v1, v2, corpus, o);
  const EvalReport b = Evaluate(&v1, v2, corpus, o);
  EXPECT_EQ(metrics::FormatEvalCsv(a.vae2_rows), metrics::FormatEvalCsv(b.vae2_rows));
  EXPECT_EQ(metrics::FormatEvalCsv(a.vae1_rows), metrics::FormatEvalCsv(b.vae1_rows));
  EXPECT_EQ(a.SummaryText(), b.SummaryText());
  ASSERT_EQ(a.vae2_rows.size(), 3u);
  ASSERT_EQ(a.polylines.size(), 3u);

  const fs::path d = dir_->path() / "eval_ckpt";
  fs::create_directories(d);
  SaveCheckpoint(d / "v1.ckpt", v1.ToCheckpoint({}));
  SaveCheckpoint(d / "v2.ckpt", v2.ToCheckpoint({}));
  const vae1::Vae1Model v1b = vae1::Vae1Model::FromCheckpoint(LoadCheckpoint(d / "v1.ckpt"));
  const vae2::Vae2Model v2b = vae2::Vae2Model::FromCheckpoint(LoadCheckpoint(d / "v2.ckpt"));
  const EvalReport c = Evaluate(&v1b, v2b, corpus, o);
  EXPECT_EQ(metrics::FormatEvalCsv(c.vae2_rows), metrics::FormatEvalCsv(a.vae2_rows));

  WriteEvalReport(a, d / "out");
  EXPECT_TRUE(fs::exists(d / "out" / "vae1.csv"));
  EXPECT_TRUE(fs::exists(d / "out" / "summary.txt"));
  EXPECT_EQ(ReadTextFile(d / "out" / "vae2.csv"), metrics::FormatEvalCsv(a.vae2_rows));
  EXPECT_TRUE(fs::exists(d / "out" / "polylines" / "scene_00002.txt"));

  const EvalReport no_vae1 = Evaluate(nullptr, v2, corpus, o);
  EXPECT_TRUE(no_vae1.vae1_rows.empty());
}

TEST_F(PipelineTest, SweepWritesOneRowPerModelAndLeg) {
  const synth::CorpusReader corpus = Corpus();
  SweepOptions o;
  o.fractions = {0.0, 1.0};
  o.seeds = {1, 2};
  o.vae1 = Tiny("vae1");
  o.vae1.epochs = 1;
  o.vae2 = Tiny("vae2");
  o.vae2.epochs = 1;
  o.eval.samples = 2;
  const fs::path out = dir_->path() / "sweep";
  const std::vector<SweepRow> rows = RunLabelSweep(corpus, o, out);
  ASSERT_EQ(rows.size(), 8u);
  for (const SweepRow& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_GE(r.means.iou, 0.0);
  }
  EXPECT_TRUE(fs::exists(out / "p0_seed1" / "vae1.ckpt"));
  EXPECT_TRUE(fs::exists(out / "p1_seed2" / "eval" / "vae2.csv"));
  EXPECT_TRUE(fs::exists(out / "plots" / "iou.svg"));
  const std::vector<SweepRow> parsed = ParseSweepCsv(ReadTextFile(out / "sweep.csv"));
  ASSERT_EQ(parsed.size(), rows.size());
  EXPECT_EQ(parsed[3].model, rows[3].model);
  EXPECT_EQ(parsed[3].seed, rows[3].seed);
  EXPECT_NEAR(parsed[3].means.iou, rows[3].means.iou, 1e-5);
}

TEST_F(PipelineTest, SweepRecordsFailedLegsAndContinues) {
  const synth::CorpusReader corpus = Corpus();
  SweepOptions o;
  o.fractions = {0.0};
  o.seeds = {1};
  o.vae1 = Tiny("vae1");
  o.vae1.epochs = 1;
  o.vae2 = Tiny("vae1");  // wrong stage for the second model
  const std::vector<SweepRow> rows = RunLabelSweep(corpus, o, dir_->path() / "sweep_fail");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status.rfind("failed: ", 0), 0u);
  EXPECT_TRUE(std::isnan(rows[1].means.iou));
  EXPECT_THROW(ParseSweepCsv("nonsense\n"), IoError);
}

}  // namespace
}  // namespace navseg::pipeline
