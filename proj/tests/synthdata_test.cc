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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "navseg/errors.h"
#include "navseg/rng.h"
#include "navseg/synthdata.h"
#include "navseg/ten_io.h"
#include "test_util.h"

namespace navseg::synth {
namespace {

namespace fs = std::filesystem;

TEST(BoundaryTest, DeterministicPerSeed) {
  const BoundaryCurve a = GenerateBoundary(7, 64, 96, 5);
  const BoundaryCurve b = GenerateBoundary(7, 64, 96, 5);
  const BoundaryCurve c = GenerateBoundary(8, 64, 96, 5);
  EXPECT_EQ(a.control_y, b.control_y);
  EXPECT_NE(a.control_y, c.control_y);
  EXPECT_EQ(a.control_x.front(), 0.0);
  EXPECT_EQ(a.control_x.back(), 95.0);
}

TEST(BoundaryTest, ControlsStayInsideBand) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const BoundaryCurve curve = GenerateBoundary(seed, 64, 96, 5);
    for (double y : curve.control_y) {
      ASSERT_GE(y, 0.15 * 64);
      ASSERT_LE(y, 0.85 * 64);
    }
  }
}

TEST(BoundaryTest, RejectsDegenerateSizes) {
  EXPECT_THROW(GenerateBoundary(1, 64, 96, 2), InvalidArgument);
  EXPECT_THROW(GenerateBoundary(1, 64, 15, 5), InvalidArgument);
}

// Shape-preserving interpolation: passes through controls and never leaves
// the range of the two controls bracketing a column.
TEST(BoundaryTest, InterpolationIsShapePreserving) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const BoundaryCurve curve = GenerateBoundary(seed, 64, 96, 5);
    for (size_t k = 0; k < curve.control_x.size(); ++k) {
      EXPECT_NEAR(curve.Evaluate(curve.control_x[k]), curve.control_y[k], 1e-12);
    }
    for (double u = 0; u <= 95; u += 0.25) {
      size_t k = 0;
      while (k + 2 < curve.control_x.size() && u > curve.control_x[k + 1]) ++k;
      const double lo = std::min(curve.control_y[k], curve.control_y[k + 1]);
      const double hi = std::max(curve.control_y[k], curve.control_y[k + 1]);
      const double y = curve.Evaluate(u);
      ASSERT_GE(y, lo - 1e-9);
      ASSERT_LE(y, hi + 1e-9);
    }
  }
}

BoundaryCurve FlatCurve(double row, int width) {
  return BoundaryCurve{{0.0, (width - 1) / 2.0, width - 1.0}, {row, row, row}};
}

TEST(RenderSceneTest, NormalsAreUnitAndMaskFollowsCurve) {
  const CorpusConfig config;
  for (int i = 0; i < 5; ++i) {
    const SceneSample s = GenerateScene(config, Split::kTrain, i);
    for (int v = 0; v < s.height(); ++v) {
      for (int u = 0; u < s.width(); ++u) {
        const double n = std::hypot(s.normals.at(v, u, 0) * 1.0, s.normals.at(v, u, 1),
                                    s.normals.at(v, u, 2));
        ASSERT_NEAR(n, 1.0, 1e-5);
      }
    }
    Rng rng = MakeRng({99, static_cast<uint64_t>(i)});
    std::uniform_int_distribution<int> row(0, s.height() - 1), col(0, s.width() - 1);
    for (int probe = 0; probe < 1000; ++probe) {
      const int v = row(rng), u = col(rng);
      ASSERT_EQ(s.mask.at(v, u), v > s.curve.Evaluate(u) ? 1.0 : 0.0);
    }
  }
}

TEST(RenderSceneTest, NoiseRegionsAreDisjointAndInRange) {
  const CorpusConfig config;
  for (int i = 0; i < 100; ++i) {
    const SceneSample s = GenerateScene(config, Split::kTest, i);
    ASSERT_GE(s.noise_regions.size(), 1u);
    ASSERT_LE(s.noise_regions.size(), 2u);
    std::vector<int> hits(static_cast<size_t>(s.width()), 0);
    for (const auto& r : s.noise_regions) {
      ASSERT_GE(r.lo, 0);
      ASSERT_LE(r.hi, s.width());
      ASSERT_LT(r.lo, r.hi);
      for (int u = r.lo; u < r.hi; ++u) ++hits[u];
    }
    EXPECT_LE(*std::max_element(hits.begin(), hits.end()), 1);
  }
}

TEST(RenderSceneTest, ZeroBaseNoiseGivesExactUpNormalsOutsideRegions) {
  NoiseParams noise;
  noise.base = 0.0;
  const SceneSample s = RenderScene(GenerateBoundary(3, 64, 96, 5), 64, 96, noise, 11);
  int checked = 0;
  for (int v = 0; v < 64; ++v) {
    for (int u = 0; u < 96; ++u) {
      const bool in_region = std::any_of(s.noise_regions.begin(), s.noise_regions.end(),
                                         [&](const ColumnInterval& r) { return r.Contains(u); });
      if (in_region || s.mask.at(v, u) != 1.0) continue;
      ASSERT_EQ(s.normals.at(v, u, 0), 0.0);
      ASSERT_EQ(s.normals.at(v, u, 1), 0.0);
      ASSERT_EQ(s.normals.at(v, u, 2), 1.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(RenderSceneTest, FlatCurveMaskMean) {
  const SceneSample s = RenderScene(FlatCurve(32.0, 96), 64, 96, NoiseParams{}, 1);
  // Rows 33..63 lie strictly below the curve.
  EXPECT_DOUBLE_EQ(s.mask.Sum() / s.mask.size(), 31.0 / 64.0);
}

TEST(RenderSceneTest, DeterministicPerSeed) {
  const BoundaryCurve curve = GenerateBoundary(5, 64, 96, 5);
  const SceneSample a = RenderScene(curve, 64, 96, NoiseParams{}, 21);
  const SceneSample b = RenderScene(curve, 64, 96, NoiseParams{}, 21);
  EXPECT_EQ(a.normals, b.normals);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.noise_regions, b.noise_regions);
}

TEST(LabeledSubsetTest, SizesAndNesting) {
  EXPECT_EQ(LabeledSubset(1, 200, 0.1).size(), 20u);
  EXPECT_TRUE(LabeledSubset(1, 200, 0.0).empty());
  EXPECT_EQ(LabeledSubset(1, 200, 1.0).size(), 200u);
  EXPECT_EQ(LabeledSubset(1, 200, 0.3), LabeledSubset(1, 200, 0.3));
  const std::vector<double> fractions = {0.0, 0.01, 0.1, 0.3, 0.5, 1.0};
  for (size_t i = 0; i + 1 < fractions.size(); ++i) {
    const auto small = LabeledSubset(4, 200, fractions[i]);
    const auto large = LabeledSubset(4, 200, fractions[i + 1]);
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
  EXPECT_THROW(LabeledSubset(1, 200, 1.5), InvalidArgument);
}

TEST(CorpusTest, TrainAndTestSeedsAreDistinct) {
  std::set<uint64_t> seeds;
  for (int i = 0; i < 200; ++i) seeds.insert(SceneSeed(1, Split::kTrain, i));
  for (int i = 0; i < 40; ++i) seeds.insert(SceneSeed(1, Split::kTest, i));
  EXPECT_EQ(seeds.size(), 240u);
}

std::vector<std::pair<std::string, std::vector<uint8_t>>> Snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::vector<uint8_t>>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files.emplace_back(fs::relative(e.path(), root).string(), ReadFileBytes(e.path()));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

TEST(CorpusTest, BuildWritesLayoutAndIsByteIdentical) {
  testing::ScopedTempDir dir;
  CorpusConfig config;
  config.label_fraction = 0.1;
  BuildCorpus(config, dir.path() / "a", false);
  BuildCorpus(config, dir.path() / "b", false);
  EXPECT_EQ(Snapshot(dir.path() / "a"), Snapshot(dir.path() / "b"));

  int scene_dirs = 0;
  for (const char* split : {"train", "test"}) {
    for (const auto& e : fs::directory_iterator(dir.path() / "a" / split)) {
      ++scene_dirs;
      for (const char* f : {"normals.ten", "mask.ten", "curve.txt", "noise.txt"}) {
        ASSERT_TRUE(fs::exists(e.path() / f)) << e.path() / f;
      }
    }
  }
  EXPECT_EQ(scene_dirs, 240);
  const std::string manifest = ReadTextFile(dir.path() / "a" / "manifest.txt");
  for (const char* key : {"version=", "seed=1", "h=64", "w=96", "n_train=200", "n_test=40",
                          "p=0.1", "noise_base=", "noise_amp="}) {
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
  }
}

TEST(CorpusTest, RefusesNonEmptyOutputWithoutOverwrite) {
  testing::ScopedTempDir dir;
  CorpusConfig config;
  config.n_train = 2;
  config.n_test = 1;
  fs::create_directories(dir.path() / "c");
  WriteTextFile(dir.path() / "c" / "junk.txt", "x");
  EXPECT_THROW(BuildCorpus(config, dir.path() / "c", false), IoError);
  BuildCorpus(config, dir.path() / "c", true);
  EXPECT_FALSE(fs::exists(dir.path() / "c" / "junk.txt"));
}

TEST(CorpusReaderTest, ReadsBackScenesAndAuditsGroundTruth) {
  testing::ScopedTempDir dir;
  CorpusConfig config;
  config.n_train = 6;
  config.n_test = 3;
  config.label_fraction = 0.5;
  BuildCorpus(config, dir.path(), true);
  const CorpusReader reader(dir.path());
  EXPECT_EQ(reader.count(Split::kTrain), 6);
  EXPECT_EQ(reader.count(Split::kTest), 3);
  EXPECT_EQ(reader.labeled_ids(), LabeledSubset(config.seed, 6, 0.5));
  EXPECT_EQ(reader.config().noise.amplification, config.noise.amplification);

  const SceneSample s = GenerateScene(config, Split::kTest, 2);
  // Scene tensors are stored in single precision.
  Tensor stored = s.normals;
  for (double& v : stored.values()) v = static_cast<float>(v);
  EXPECT_EQ(reader.ReadNormals(Split::kTest, 2), stored);
  EXPECT_EQ(reader.ReadNoiseRegions(Split::kTest, 2), s.noise_regions);
  EXPECT_TRUE(reader.audit_log().empty());
  EXPECT_EQ(reader.ReadMask(Split::kTest, 2), s.mask);
  const BoundaryCurve curve = reader.ReadCurve(Split::kTest, 2);
  for (double u = 0; u < 96; u += 0.5) EXPECT_NEAR(curve.Evaluate(u), s.curve.Evaluate(u), 1e-9);
  EXPECT_EQ(reader.audit_log().size(), 2u);
  EXPECT_THROW(reader.ReadNormals(Split::kTest, 3), InvalidArgument);
}

TEST(CorpusReaderTest, MissingCorpusIsAnIoError) {
  testing::ScopedTempDir dir;
  EXPECT_THROW(CorpusReader(dir.path() / "nope"), IoError);
}

}  // namespace
}  // namespace navseg::synth
