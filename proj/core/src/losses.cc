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

#include "navseg/losses.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "navseg/errors.h"
#include "navseg/vae2.h"

namespace navseg::losses {
namespace {

// Per-window statistics over the valid window grid.
struct WindowStats {
  int rows = 0;
  int cols = 0;
  std::vector<double> mu_a, mu_b, var_a, var_b, cov;
};

void CheckPair(const Tensor& a, const Tensor& b, const SsimOptions& o) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw InvalidArgument("Ssim: shape mismatch " + ShapeString(a.shape()) + " vs " +
                          ShapeString(b.shape()));
  }
  if (o.window < 3 || o.window % 2 == 0) throw InvalidArgument("Ssim: window must be odd and >= 3");
  if (a.dim(0) < o.window || a.dim(1) < o.window) throw InvalidArgument("Ssim: image smaller than window");
}

// Summed-area table with a zero border: (H + 1) x (W + 1).
std::vector<double> Integral(const Tensor& img, auto&& f) {
  const int h = img.dim(0), w = img.dim(1);
  std::vector<double> s(static_cast<size_t>(h + 1) * (w + 1), 0.0);
  for (int i = 0; i < h; ++i) {
    double row = 0.0;
    for (int j = 0; j < w; ++j) {
      row += f(i, j);
      s[(i + 1) * (w + 1) + j + 1] = s[i * (w + 1) + j + 1] + row;
    }
  }
  return s;
}

double BoxSum(const std::vector<double>& s, int w1, int i, int j, int k) {
  return s[(i + k) * w1 + j + k] - s[i * w1 + j + k] - s[(i + k) * w1 + j] + s[i * w1 + j];
}

WindowStats ComputeStats(const Tensor& a, const Tensor& b, int k) {
  const int h = a.dim(0), w = a.dim(1);
  const auto sa = Integral(a, [&](int i, int j) { return a.at(i, j); });
  const auto sb = Integral(b, [&](int i, int j) { return b.at(i, j); });
  const auto saa = Integral(a, [&](int i, int j) { return a.at(i, j) * a.at(i, j); });
  const auto sbb = Integral(b, [&](int i, int j) { return b.at(i, j) * b.at(i, j); });
  const auto sab = Integral(a, [&](int i, int j) { return a.at(i, j) * b.at(i, j); });
  WindowStats st;
  st.rows = h - k + 1;
  st.cols = w - k + 1;
  const size_t n_win = static_cast<size_t>(st.rows) * st.cols;
  st.mu_a.resize(n_win);
  st.mu_b.resize(n_win);
  st.var_a.resize(n_win);
  st.var_b.resize(n_win);
  st.cov.resize(n_win);
  const double inv = 1.0 / (k * k);
  for (int i = 0; i < st.rows; ++i) {
    for (int j = 0; j < st.cols; ++j) {
      const size_t q = static_cast<size_t>(i) * st.cols + j;
      const double ma = BoxSum(sa, w + 1, i, j, k) * inv;
      const double mb = BoxSum(sb, w + 1, i, j, k) * inv;
      st.mu_a[q] = ma;
      st.mu_b[q] = mb;
      st.var_a[q] = BoxSum(saa, w + 1, i, j, k) * inv - ma * ma;
      st.var_b[q] = BoxSum(sbb, w + 1, i, j, k) * inv - mb * mb;
      st.cov[q] = BoxSum(sab, w + 1, i, j, k) * inv - ma * mb;
    }
  }
  return st;
}

}  // namespace

void LossWeights::Validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) {
    throw InvalidArgument("loss weights must be nonnegative");
  }
  if (std::abs(lambda1 + lambda2 + lambda3 - 1.0) > 1e-9) {
    throw InvalidArgument("loss weights must sum to 1");
  }
}

double Ssim(const Tensor& a, const Tensor& b, const SsimOptions& o) {
  CheckPair(a, b, o);
  const WindowStats st = ComputeStats(a, b, o.window);
  double total = 0.0;
  for (size_t q = 0; q < st.mu_a.size(); ++q) {
    const double num = (2 * st.mu_a[q] * st.mu_b[q] + o.c1) * (2 * st.cov[q] + o.c2);
    const double den = (st.mu_a[q] * st.mu_a[q] + st.mu_b[q] * st.mu_b[q] + o.c1) *
                       (st.var_a[q] + st.var_b[q] + o.c2);
    total += num / den;
  }
  return total / static_cast<double>(st.mu_a.size());
}

Tensor SsimGradient(const Tensor& a, const Tensor& b, const SsimOptions& o) {
  CheckPair(a, b, o);
  const int k = o.window;
  const WindowStats st = ComputeStats(a, b, k);
  const size_t n_win = st.mu_a.size();
  // dS_w/db_p = (c0_w + c1_w * b_p + c2_w * a_p) / k^2 for p in window w.
  Tensor c0({st.rows, st.cols}), c1({st.rows, st.cols}), c2({st.rows, st.cols});
  for (size_t q = 0; q < n_win; ++q) {
    const double ma = st.mu_a[q], mb = st.mu_b[q];
    const double a1 = 2 * ma * mb + o.c1, a2 = 2 * st.cov[q] + o.c2;
    const double b1 = ma * ma + mb * mb + o.c1, b2 = st.var_a[q] + st.var_b[q] + o.c2;
    const double s = a1 * a2 / (b1 * b2);
    const double d_mu_b = 2 * ma * a2 / (b1 * b2) - 2 * mb * s / b1;
    const double d_cov = 2 * a1 / (b1 * b2);
    const double d_var_b = -s / b2;
    c1[q] = 2 * d_var_b;
    c2[q] = d_cov;
    c0[q] = d_mu_b - c1[q] * mb - c2[q] * ma;
  }
  const int h = a.dim(0), w = a.dim(1);
  const auto s0 = Integral(c0, [&](int i, int j) { return c0.at(i, j); });
  const auto s1 = Integral(c1, [&](int i, int j) { return c1.at(i, j); });
  const auto s2 = Integral(c2, [&](int i, int j) { return c2.at(i, j); });
  const int w1 = st.cols + 1;
  auto range_sum = [&](const std::vector<double>& s, int i0, int i1, int j0, int j1) {
    return s[i1 * w1 + j1] - s[i0 * w1 + j1] - s[i1 * w1 + j0] + s[i0 * w1 + j0];
  };
  const double scale = 1.0 / (static_cast<double>(k) * k * static_cast<double>(n_win));
  Tensor grad({h, w});
  for (int y = 0; y < h; ++y) {
    const int i0 = std::max(0, y - k + 1), i1 = std::min(st.rows, y + 1);
    for (int x = 0; x < w; ++x) {
      const int j0 = std::max(0, x - k + 1), j1 = std::min(st.cols, x + 1);
      if (i0 >= i1 || j0 >= j1) continue;
      grad.at(y, x) = scale * (range_sum(s0, i0, i1, j0, j1) +
                               range_sum(s1, i0, i1, j0, j1) * b.at(y, x) +
                               range_sum(s2, i0, i1, j0, j1) * a.at(y, x));
    }
  }
  return grad;
}

ad::Var Ssim(const ad::Var& a, const ad::Var& b, const SsimOptions& options) {
  const double value = Ssim(a.value(), b.value(), options);
  return ad::MakeOp(Tensor::Scalar(value), {a, b}, [options](ad::Node& n) {
    ad::Node& an = *n.inputs[0];
    ad::Node& bn = *n.inputs[1];
    if (an.requires_grad) an.Grad().AddScaled(SsimGradient(bn.value, an.value, options), n.grad[0]);
    if (bn.requires_grad) bn.Grad().AddScaled(SsimGradient(an.value, bn.value, options), n.grad[0]);
  });
}

Vae2LossBreakdown Vae2Loss(const Tensor& pseudo_label, const Tensor& rendered,
                           std::span<const double> sigma2,
                           std::span<const double> epsilon2,
                           const LossWeights& weights) {
  weights.Validate();
  if (pseudo_label.shape() != rendered.shape()) throw InvalidArgument("Vae2Loss: shape mismatch");
  Vae2LossBreakdown out;
  out.ssim_term = 0.5 * (1.0 - Ssim(pseudo_label, rendered));
  double sq = 0.0;
  for (size_t i = 0; i < rendered.size(); ++i) {
    const double d = pseudo_label[i] - rendered[i];
    sq += d * d;
  }
  out.mse_term = sq / static_cast<double>(rendered.size());
  out.kl_term = vae2::GaussianPriorKl(sigma2, epsilon2);
  out.total = weights.lambda1 * out.ssim_term + weights.lambda2 * out.mse_term +
              weights.lambda3 * out.kl_term;
  return out;
}

ad::Var Vae2Loss(const Tensor& pseudo_label, const ad::Var& rendered,
                 const ad::Var& sigma2, std::span<const double> epsilon2,
                 const LossWeights& weights, Vae2LossBreakdown* breakdown) {
  weights.Validate();
  if (pseudo_label.shape() != rendered.shape()) throw InvalidArgument("Vae2Loss: shape mismatch");
  const ad::Var target = ad::Constant(pseudo_label);
  const ad::Var ssim_term = ad::Scale(ad::Sub(ad::Constant(Tensor::Scalar(1.0)),
                                              Ssim(target, rendered)), 0.5);
  const ad::Var mse_term = ad::Scale(ad::SquaredDistance(rendered, pseudo_label),
                                     1.0 / static_cast<double>(pseudo_label.size()));
  const ad::Var kl_term = vae2::GaussianPriorKl(sigma2, epsilon2);
  const ad::Var total = ad::Add(ad::Add(ad::Scale(ssim_term, weights.lambda1),
                                        ad::Scale(mse_term, weights.lambda2)),
                                ad::Scale(kl_term, weights.lambda3));
  if (breakdown) {
    breakdown->ssim_term = ssim_term.value()[0];
    breakdown->mse_term = mse_term.value()[0];
    breakdown->kl_term = kl_term.value()[0];
    breakdown->total = total.value()[0];
  }
  return total;
}

namespace {

void CheckBinary(const Tensor& prediction, const Tensor& gt) {
  if (prediction.shape() != gt.shape()) throw InvalidArgument("SupervisedLoss: shape mismatch");
  for (double g : gt.values()) {
    if (g != 0.0 && g != 1.0) throw InvalidArgument("SupervisedLoss: gt must be binary");
  }
}

}  // namespace

double SupervisedLoss(const Tensor& prediction, const Tensor& gt) {
  CheckBinary(prediction, gt);
  double total = 0.0;
  for (size_t i = 0; i < gt.size(); ++i) {
    const double p = std::clamp(prediction[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= gt[i] > 0.5 ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(gt.size());
}

ad::Var SupervisedLoss(const ad::Var& prediction, const Tensor& gt) {
  const double value = SupervisedLoss(prediction.value(), gt);
  return ad::MakeOp(Tensor::Scalar(value), {prediction}, [gt](ad::Node& n) {
    ad::Node& in = *n.inputs[0];
    Tensor& g = in.Grad();
    const double scale = n.grad[0] / static_cast<double>(gt.size());
    for (size_t i = 0; i < gt.size(); ++i) {
      const double p = in.value[i];
      if (p <= kProbabilityClamp || p >= 1.0 - kProbabilityClamp) continue;
      g[i] += scale * (gt[i] > 0.5 ? -1.0 / p : 1.0 / (1.0 - p));
    }
  });
}

}  // namespace navseg::losses
