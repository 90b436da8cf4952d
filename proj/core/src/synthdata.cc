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

#include "navseg/synthdata.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "navseg/errors.h"
#include "navseg/kv.h"
#include "navseg/rng.h"
#include "navseg/ten_io.h"

namespace navseg::synth {
namespace {

constexpr int kCorpusVersion = 1;

struct Vec3 {
  double x, y, z;
};

Vec3 Normalized(Vec3 v, Vec3 fallback) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  if (n < 1e-12) return fallback;
  return {v.x / n, v.y / n, v.z / n};
}

int UniformInt(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(rng);
}

// Fritsch-Carlson slopes for evenly spaced knots.
std::vector<double> MonotoneSlopes(const std::vector<double>& y, double h) {
  const size_t n = y.size();
  std::vector<double> d(n - 1), m(n);
  for (size_t k = 0; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k]) / h;
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (size_t k = 1; k + 1 < n; ++k) {
    m[k] = (d[k - 1] * d[k] <= 0.0) ? 0.0 : 2.0 / (1.0 / d[k - 1] + 1.0 / d[k]);
  }
  return m;
}

std::map<std::string, std::string> ParseManifest(const std::string& text,
                                                  const std::string& where) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(where + ": malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double ParseDouble(const std::string& s, const std::string& where) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": bad number '" + s + "'");
  }
}

}  // namespace

double BoundaryCurve::Evaluate(double column) const {
  const size_t n = control_x.size();
  if (n < 2) throw InvalidArgument("BoundaryCurve needs at least 2 controls");
  const double h = control_x[1] - control_x[0];
  const std::vector<double> m = MonotoneSlopes(control_y, h);
  const double c = std::clamp(column, control_x.front(), control_x.back());
  size_t k = std::min(static_cast<size_t>((c - control_x[0]) / h), n - 2);
  const double t = (c - control_x[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * control_y[k] + (t3 - 2 * t2 + t) * h * m[k] +
         (-2 * t3 + 3 * t2) * control_y[k + 1] + (t3 - t2) * h * m[k + 1];
}

std::vector<double> BoundaryCurve::EvaluateColumns(int width) const {
  std::vector<double> b(static_cast<size_t>(width));
  for (int u = 0; u < width; ++u) b[u] = Evaluate(u);
  return b;
}

Tensor ToChannelFirst(const Tensor& hwc) {
  if (hwc.rank() != 3) throw InvalidArgument("ToChannelFirst expects [H, W, C]");
  const int h = hwc.dim(0), w = hwc.dim(1), c_n = hwc.dim(2);
  Tensor out({c_n, h, w});
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      for (int c = 0; c < c_n; ++c) out.at(c, v, u) = hwc.at(v, u, c);
    }
  }
  return out;
}

BoundaryCurve GenerateBoundary(uint64_t seed, int height, int width,
                               int control_points) {
  if (control_points < 3) throw InvalidArgument("GenerateBoundary: M must be >= 3");
  if (width < 16) throw InvalidArgument("GenerateBoundary: W must be >= 16");
  if (height < 16) throw InvalidArgument("GenerateBoundary: H must be >= 16");
  Rng rng = MakeRng({seed, 0xB0DA});
  const double lo = 0.15 * height, hi = 0.85 * height;
  const double level = UniformIn(rng, 0.3 * height, 0.7 * height);
  BoundaryCurve curve;
  for (int k = 0; k < control_points; ++k) {
    curve.control_x.push_back(static_cast<double>(k) * (width - 1) / (control_points - 1));
    const double y = level + UniformIn(rng, -0.2 * height, 0.2 * height);
    curve.control_y.push_back(std::clamp(y, lo, hi));
  }
  return curve;
}

SceneSample RenderScene(const BoundaryCurve& curve, int height, int width,
                        const NoiseParams& noise, uint64_t seed) {
  if (height < 16 || width < 16) throw InvalidArgument("RenderScene: H, W must be >= 16");
  if (noise.base < 0 || noise.amplification < 0 || noise.min_regions < 0 ||
      noise.max_regions < noise.min_regions) {
    throw InvalidArgument("RenderScene: invalid noise parameters");
  }
  Rng rng = MakeRng({seed, 0x5CE7E});
  const std::vector<double> boundary = curve.EvaluateColumns(width);

  // Obstacle facing directions, piecewise constant over 1-3 column segments.
  const int n_segments = UniformInt(rng, 1, 3);
  std::vector<int> cuts;
  for (int s = 1; s < n_segments; ++s) cuts.push_back(UniformInt(rng, 1, width - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<Vec3> segment_normal;
  for (int s = 0; s < n_segments; ++s) {
    const double phi = UniformIn(rng, M_PI / 2 - 0.7, M_PI / 2 + 0.7);
    const double tilt = UniformIn(rng, -0.2, 0.2);
    segment_normal.push_back(Normalized({std::cos(phi), std::sin(phi), tilt}, {0, 1, 0}));
  }
  std::vector<Vec3> obstacle(static_cast<size_t>(width));
  for (int u = 0; u < width; ++u) {
    const auto seg = std::upper_bound(cuts.begin(), cuts.end(), u) - cuts.begin();
    obstacle[u] = segment_normal[static_cast<size_t>(seg)];
  }

  // Disjoint noise regions placed by rejection sampling.
  std::vector<ColumnInterval> regions;
  const int n_regions = UniformInt(rng, noise.min_regions, noise.max_regions);
  const int max_w = std::max(4, std::min(26, width / 3));
  const int min_w = std::max(3, std::min(16, max_w));
  for (int r = 0; r < n_regions; ++r) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int w = UniformInt(rng, min_w, max_w);
      const int lo = UniformInt(rng, 0, width - w);
      const ColumnInterval cand{lo, lo + w};
      const bool overlaps = std::any_of(regions.begin(), regions.end(), [&](const ColumnInterval& o) {
        return cand.lo < o.hi + 2 && o.lo < cand.hi + 2;
      });
      if (!overlaps) {
        regions.push_back(cand);
        break;
      }
    }
  }
  std::sort(regions.begin(), regions.end(),
            [](const ColumnInterval& a, const ColumnInterval& b) { return a.lo < b.lo; });

  // Wrong-class distractor patches near the boundary inside noise regions.
  std::vector<uint8_t> flipped(static_cast<size_t>(height) * width, 0);
  for (const ColumnInterval& reg : regions) {
    for (int p = 0; p < noise.patches_per_region; ++p) {
      const int pw = std::min(UniformInt(rng, 3, 7), reg.hi - reg.lo);
      const int ph = UniformInt(rng, 3, 7);
      const int u0 = UniformInt(rng, reg.lo, reg.hi - pw);
      const double center = boundary[static_cast<size_t>(u0 + pw / 2)] + UniformIn(rng, -5.0, 5.0);
      const int v0 = static_cast<int>(std::lround(center - ph / 2.0));
      for (int v = std::max(0, v0); v < std::min(height, v0 + ph); ++v) {
        for (int u = u0; u < u0 + pw; ++u) flipped[static_cast<size_t>(v) * width + u] = 1;
      }
    }
  }

  std::vector<double> column_std(static_cast<size_t>(width), noise.base);
  for (const ColumnInterval& reg : regions) {
    for (int u = reg.lo; u < reg.hi; ++u) column_std[u] = noise.base * noise.amplification;
  }

  SceneSample scene;
  scene.curve = curve;
  scene.noise_regions = regions;
  scene.seed = seed;
  scene.normals = Tensor({height, width, 3});
  scene.mask = Tensor({height, width});
  const Vec3 up{0.0, 0.0, 1.0};
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const bool navigable = v > boundary[u];
      scene.mask.at(v, u) = navigable ? 1.0 : 0.0;
      const bool looks_navigable = navigable != (flipped[static_cast<size_t>(v) * width + u] != 0);
      const Vec3 base = looks_navigable ? up : obstacle[u];
      const double s = column_std[u];
      const double ex = StandardNormal(rng), ey = StandardNormal(rng), ez = StandardNormal(rng);
      const Vec3 n = Normalized({base.x + s * ex, base.y + s * ey, base.z + s * ez}, base);
      // Stored at float precision so in-memory scenes equal reloaded ones.
      double* px = scene.normals.data() + (static_cast<size_t>(v) * width + u) * 3;
      px[0] = static_cast<float>(n.x);
      px[1] = static_cast<float>(n.y);
      px[2] = static_cast<float>(n.z);
    }
  }
  return scene;
}

std::string SplitName(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + name + "' (expected train or test)");
}

uint64_t SceneSeed(uint64_t corpus_seed, Split split, int index) {
  return DeriveSeed({corpus_seed, split == Split::kTrain ? 0x7A41ULL : 0x7E57ULL,
                     static_cast<uint64_t>(index)});
}

SceneSample GenerateScene(const CorpusConfig& config, Split split, int index) {
  const uint64_t seed = SceneSeed(config.seed, split, index);
  const BoundaryCurve curve = GenerateBoundary(DeriveSeed({seed, 1}), config.height,
                                               config.width, config.control_points);
  return RenderScene(curve, config.height, config.width, config.noise, DeriveSeed({seed, 2}));
}

std::vector<int> LabeledSubset(uint64_t seed, int n_train, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("label fraction must lie in [0, 1]");
  std::vector<int> perm(static_cast<size_t>(n_train));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = MakeRng({seed, 0x1ABE1});
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto count = static_cast<size_t>(std::llround(p * n_train));
  std::vector<int> ids(perm.begin(), perm.begin() + static_cast<long>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

Corpus GenerateCorpus(const CorpusConfig& config) {
  Corpus corpus;
  corpus.config = config;
  for (int i = 0; i < config.n_train; ++i) corpus.train.push_back(GenerateScene(config, Split::kTrain, i));
  for (int i = 0; i < config.n_test; ++i) corpus.test.push_back(GenerateScene(config, Split::kTest, i));
  corpus.labeled_ids = LabeledSubset(config.seed, config.n_train, config.label_fraction);
  return corpus;
}

std::string SceneDirName(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05d", index);
  return buf;
}

void BuildCorpus(const CorpusConfig& config, const std::filesystem::path& root,
                 bool overwrite) {
  namespace fs = std::filesystem;
  if (config.n_train < 0 || config.n_test < 0) throw InvalidArgument("negative scene count");
  if (fs::exists(root) && !(fs::is_directory(root) && fs::is_empty(root))) {
    if (!overwrite) {
      throw IoError(root.string() + " exists and is not empty (pass overwrite to replace)");
    }
    fs::remove_all(root);
  }
  const std::vector<int> labeled = LabeledSubset(config.seed, config.n_train, config.label_fraction);
  fs::create_directories(root);

  std::ostringstream manifest;
  manifest << "version=" << kCorpusVersion << "\n"
           << "seed=" << config.seed << "\n"
           << "h=" << config.height << "\n"
           << "w=" << config.width << "\n"
           << "n_train=" << config.n_train << "\n"
           << "n_test=" << config.n_test << "\n"
           << "p=" << FormatNumber(config.label_fraction) << "\n"
           << "noise_base=" << FormatNumber(config.noise.base) << "\n"
           << "noise_amp=" << FormatNumber(config.noise.amplification) << "\n"
           << "m=" << config.control_points << "\n";
  WriteTextFile(root / "manifest.txt", manifest.str());

  for (Split split : {Split::kTrain, Split::kTest}) {
    const int n = split == Split::kTrain ? config.n_train : config.n_test;
    for (int i = 0; i < n; ++i) {
      const SceneSample scene = GenerateScene(config, split, i);
      const fs::path dir = root / SplitName(split) / SceneDirName(i);
      fs::create_directories(dir);
      WriteTen(dir / "normals.ten", scene.normals);
      WriteTen(dir / "mask.ten", scene.mask);
      std::string curve;
      for (size_t k = 0; k < scene.curve.control_x.size(); ++k) {
        curve += FormatNumber(scene.curve.control_x[k]) + " " +
                 FormatNumber(scene.curve.control_y[k]) + "\n";
      }
      WriteTextFile(dir / "curve.txt", curve);
      std::string regions;
      for (const ColumnInterval& r : scene.noise_regions) {
        regions += std::to_string(r.lo) + " " + std::to_string(r.hi) + "\n";
      }
      WriteTextFile(dir / "noise.txt", regions);
    }
  }
  std::string ids;
  for (int id : labeled) ids += std::to_string(id) + "\n";
  WriteTextFile(root / "labeled_ids.txt", ids);
}

CorpusReader::CorpusReader(std::filesystem::path root) : root_(std::move(root)) {
  const std::filesystem::path manifest_path = root_ / "manifest.txt";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError(manifest_path.string() + ": corpus manifest not found");
  }
  const auto kv = ParseManifest(ReadTextFile(manifest_path), manifest_path.string());
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError(manifest_path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  const std::string where = manifest_path.string();
  if (static_cast<int>(ParseDouble(get("version"), where)) != kCorpusVersion) {
    throw IoError(where + ": unsupported corpus version");
  }
  config_.seed = static_cast<uint64_t>(std::stoull(get("seed")));
  config_.height = static_cast<int>(ParseDouble(get("h"), where));
  config_.width = static_cast<int>(ParseDouble(get("w"), where));
  config_.n_train = static_cast<int>(ParseDouble(get("n_train"), where));
  config_.n_test = static_cast<int>(ParseDouble(get("n_test"), where));
  config_.label_fraction = ParseDouble(get("p"), where);
  config_.noise.base = ParseDouble(get("noise_base"), where);
  config_.noise.amplification = ParseDouble(get("noise_amp"), where);
  if (kv.count("m")) config_.control_points = static_cast<int>(ParseDouble(kv.at("m"), where));

  const std::filesystem::path ids_path = root_ / "labeled_ids.txt";
  std::istringstream ids(ReadTextFile(ids_path));
  int id = 0;
  while (ids >> id) {
    if (id < 0 || id >= config_.n_train) throw IoError(ids_path.string() + ": id out of range");
    labeled_ids_.push_back(id);
  }
}

int CorpusReader::count(Split split) const {
  return split == Split::kTrain ? config_.n_train : config_.n_test;
}

std::filesystem::path CorpusReader::SceneDir(Split split, int index) const {
  if (index < 0 || index >= count(split)) {
    throw InvalidArgument("scene index " + std::to_string(index) + " out of range");
  }
  return root_ / SplitName(split) / SceneDirName(index);
}

Tensor CorpusReader::ReadNormals(Split split, int index) const {
  Tensor t = ReadTen(SceneDir(split, index) / "normals.ten");
  if (t.shape() != std::vector<int>{config_.height, config_.width, 3}) {
    throw IoError((SceneDir(split, index) / "normals.ten").string() + ": unexpected shape " +
                  ShapeString(t.shape()));
  }
  return t;
}

std::vector<ColumnInterval> CorpusReader::ReadNoiseRegions(Split split, int index) const {
  const std::filesystem::path path = SceneDir(split, index) / "noise.txt";
  std::istringstream in(ReadTextFile(path));
  std::vector<ColumnInterval> out;
  ColumnInterval r;
  while (in >> r.lo >> r.hi) out.push_back(r);
  if (!in.eof()) throw IoError(path.string() + ": malformed noise regions");
  return out;
}

Tensor CorpusReader::ReadMask(Split split, int index) const {
  const std::filesystem::path path = SceneDir(split, index) / "mask.ten";
  audit_log_.push_back(path.string());
  Tensor t = ReadTen(path);
  if (t.shape() != std::vector<int>{config_.height, config_.width}) {
    throw IoError(path.string() + ": unexpected shape " + ShapeString(t.shape()));
  }
  return t;
}

BoundaryCurve CorpusReader::ReadCurve(Split split, int index) const {
  const std::filesystem::path path = SceneDir(split, index) / "curve.txt";
  audit_log_.push_back(path.string());
  std::istringstream in(ReadTextFile(path));
  BoundaryCurve curve;
  double x = 0, y = 0;
  while (in >> x >> y) {
    curve.control_x.push_back(x);
    curve.control_y.push_back(y);
  }
  if (curve.control_x.size() < 2) throw IoError(path.string() + ": too few control points");
  return curve;
}

}  // namespace navseg::synth
