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

#include "navseg/autodiff.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "navseg/errors.h"

namespace navseg::ad {
namespace {

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " +
                          ShapeString(a.shape()) + " vs " +
                          ShapeString(b.shape()));
  }
}

template <typename Fwd, typename Deriv>
Var Unary(const Var& a, Fwd fwd, Deriv deriv) {
  Tensor out(a.shape());
  const Tensor& x = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
  return MakeOp(std::move(out), {a}, [deriv](Node& n) {
    Node& in = *n.inputs[0];
    Tensor& g = in.Grad();
    for (size_t i = 0; i < g.size(); ++i) {
      g[i] += n.grad[i] * deriv(in.value[i], n.value[i]);
    }
  });
}

// Valid output index range [lo, hi) for a strided/padded 1-D window tap.
std::pair<int, int> TapRange(int out_len, int in_len, int stride, int tap,
                             int pad) {
  int lo = 0;
  while (lo < out_len && lo * stride + tap - pad < 0) ++lo;
  int hi = out_len;
  while (hi > lo && (hi - 1) * stride + tap - pad >= in_len) --hi;
  return {lo, hi};
}

struct LinearTap {
  int i0;
  int i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

LinearTap MakeTap(double coord, int len) {
  const double c = std::clamp(coord, 0.0, static_cast<double>(len - 1));
  const int i0 = std::min(static_cast<int>(std::floor(c)), len - 1);
  const int i1 = std::min(i0 + 1, len - 1);
  return {i0, i1, c - i0};
}

}  // namespace

Tensor& Node::Grad() {
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

Var Constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Leaf(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var MakeOp(Tensor value, std::vector<Var> inputs,
           std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const Var& in : inputs) {
    n->requires_grad = n->requires_grad || in.requires_grad();
    n->inputs.push_back(in.ptr());
  }
  if (n->requires_grad) n->backward = std::move(backward);
  return Var(std::move(n));
}

void Backward(const Var& root) {
  if (root.value().size() != 1) {
    throw InvalidArgument("Backward requires a single-element root");
  }
  if (!root.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{root.node(), 0}};
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->Grad().Fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) {
      n->Grad();
      n->backward(*n);
    }
  }
}

Var Add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Add");
  Tensor out = a.value();
  out.AddScaled(b.value());
  return MakeOp(std::move(out), {a, b}, [](Node& n) {
    for (auto& in : n.inputs) {
      if (in->requires_grad) in->Grad().AddScaled(n.grad);
    }
  });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Sub");
  Tensor out = a.value();
  out.AddScaled(b.value(), -1.0);
  return MakeOp(std::move(out), {a, b}, [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->Grad().AddScaled(n.grad);
    if (n.inputs[1]->requires_grad) n.inputs[1]->Grad().AddScaled(n.grad, -1.0);
  });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Mul");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return MakeOp(std::move(out), {a, b}, [](Node& n) {
    Node& x = *n.inputs[0];
    Node& y = *n.inputs[1];
    if (x.requires_grad) {
      Tensor& g = x.Grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      Tensor& g = y.Grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * x.value[i];
    }
  });
}

Var Scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return MakeOp(std::move(out), {a}, [s](Node& n) {
    n.inputs[0]->Grad().AddScaled(n.grad, s);
  });
}

Var AddConstant(const Var& a, const Tensor& c) {
  if (a.shape() != c.shape()) throw InvalidArgument("AddConstant: shape mismatch");
  Tensor out = a.value();
  out.AddScaled(c);
  return MakeOp(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->Grad().AddScaled(n.grad);
  });
}

Var MulConstant(const Var& a, const Tensor& c) {
  if (a.shape() != c.shape()) throw InvalidArgument("MulConstant: shape mismatch");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * c[i];
  return MakeOp(std::move(out), {a}, [c](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * c[i];
  });
}

Var Exp(const Var& a) {
  return Unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var Log(const Var& a) {
  return Unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var Sqrt(const Var& a) {
  return Unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Var Square(const Var& a) {
  return Unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var Softplus(const Var& a) {
  return Unary(
      a,
      [](double x) {
        return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var Elu(const Var& a) {
  return Unary(
      a, [](double x) { return x > 0 ? x : std::expm1(x); },
      [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Var Sum(const Var& a) {
  return MakeOp(Tensor::Scalar(a.value().Sum()), {a}, [](Node& n) {
    const double g0 = n.grad[0];
    for (double& g : n.inputs[0]->Grad().values()) g += g0;
  });
}

Var Mean(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a.value().size());
  return Scale(Sum(a), inv);
}

Var SquaredDistance(const Var& a, const Tensor& target) {
  if (a.shape() != target.shape()) {
    throw InvalidArgument("SquaredDistance: shape mismatch " +
                          ShapeString(a.shape()) + " vs " +
                          ShapeString(target.shape()));
  }
  double s = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = a.value()[i] - target[i];
    s += d * d;
  }
  return MakeOp(Tensor::Scalar(s), {a}, [target](Node& n) {
    Node& x = *n.inputs[0];
    Tensor& g = x.Grad();
    const double g0 = 2.0 * n.grad[0];
    for (size_t i = 0; i < g.size(); ++i) g[i] += g0 * (x.value[i] - target[i]);
  });
}

Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const Tensor& in = x.value();
  const Tensor& wt = w.value();
  if (in.rank() != 3 || wt.rank() != 4 || wt.dim(1) != in.dim(0) ||
      wt.dim(2) != wt.dim(3) || b.value().size() != static_cast<size_t>(wt.dim(0))) {
    throw InvalidArgument("Conv2d: incompatible shapes " + ShapeString(in.shape()) +
                          " * " + ShapeString(wt.shape()));
  }
  const int c_in = in.dim(0), h = in.dim(1), wd = in.dim(2);
  const int c_out = wt.dim(0), k = wt.dim(2);
  const int ho = (h + 2 * pad - k) / stride + 1;
  const int wo = (wd + 2 * pad - k) / stride + 1;
  if (ho <= 0 || wo <= 0) throw InvalidArgument("Conv2d: empty output");

  Tensor out({c_out, ho, wo});
  for (int o = 0; o < c_out; ++o) {
    double* obase = out.data() + static_cast<size_t>(o) * ho * wo;
    std::fill(obase, obase + static_cast<size_t>(ho) * wo, b.value()[o]);
    for (int c = 0; c < c_in; ++c) {
      const double* ibase = in.data() + static_cast<size_t>(c) * h * wd;
      for (int ky = 0; ky < k; ++ky) {
        const auto [ylo, yhi] = TapRange(ho, h, stride, ky, pad);
        for (int kx = 0; kx < k; ++kx) {
          const double wv = wt.data()[((static_cast<size_t>(o) * c_in + c) * k + ky) * k + kx];
          const auto [xlo, xhi] = TapRange(wo, wd, stride, kx, pad);
          for (int oy = ylo; oy < yhi; ++oy) {
            const double* irow = ibase + static_cast<size_t>(oy * stride + ky - pad) * wd;
            double* orow = obase + static_cast<size_t>(oy) * wo;
            if (stride == 1) {
              const double* src = irow + kx - pad;
              for (int ox = xlo; ox < xhi; ++ox) orow[ox] += wv * src[ox];
            } else {
              for (int ox = xlo; ox < xhi; ++ox) {
                orow[ox] += wv * irow[ox * stride + kx - pad];
              }
            }
          }
        }
      }
    }
  }

  return MakeOp(std::move(out), {x, w, b}, [=](Node& n) {
    Node& xn = *n.inputs[0];
    Node& wn = *n.inputs[1];
    Node& bn = *n.inputs[2];
    const Tensor& go = n.grad;
    const Tensor& xin = xn.value;
    const Tensor& wv_t = wn.value;
    if (bn.requires_grad) {
      Tensor& gb = bn.Grad();
      for (int o = 0; o < c_out; ++o) {
        const double* g = go.data() + static_cast<size_t>(o) * ho * wo;
        double s = 0.0;
        for (int i = 0; i < ho * wo; ++i) s += g[i];
        gb[o] += s;
      }
    }
    double* gx = xn.requires_grad ? xn.Grad().data() : nullptr;
    double* gw = wn.requires_grad ? wn.Grad().data() : nullptr;
    if (!gx && !gw) return;
    for (int o = 0; o < c_out; ++o) {
      const double* gbase = go.data() + static_cast<size_t>(o) * ho * wo;
      for (int c = 0; c < c_in; ++c) {
        const double* ibase = xin.data() + static_cast<size_t>(c) * h * wd;
        double* gxbase = gx ? gx + static_cast<size_t>(c) * h * wd : nullptr;
        for (int ky = 0; ky < k; ++ky) {
          const auto [ylo, yhi] = TapRange(ho, h, stride, ky, pad);
          for (int kx = 0; kx < k; ++kx) {
            const size_t widx = ((static_cast<size_t>(o) * c_in + c) * k + ky) * k + kx;
            const double wv = wv_t.data()[widx];
            const auto [xlo, xhi] = TapRange(wo, wd, stride, kx, pad);
            double acc = 0.0;
            for (int oy = ylo; oy < yhi; ++oy) {
              const size_t irow = static_cast<size_t>(oy * stride + ky - pad) * wd;
              const double* grow = gbase + static_cast<size_t>(oy) * wo;
              if (stride == 1) {
                const double* src = ibase + irow + kx - pad;
                if (gw) {
                  for (int ox = xlo; ox < xhi; ++ox) acc += grow[ox] * src[ox];
                }
                if (gxbase) {
                  double* dst = gxbase + irow + kx - pad;
                  for (int ox = xlo; ox < xhi; ++ox) dst[ox] += wv * grow[ox];
                }
              } else {
                for (int ox = xlo; ox < xhi; ++ox) {
                  const size_t ii = irow + ox * stride + kx - pad;
                  if (gw) acc += grow[ox] * ibase[ii];
                  if (gxbase) gxbase[ii] += wv * grow[ox];
                }
              }
            }
            if (gw) gw[widx] += acc;
          }
        }
      }
    }
  });
}

Var SoftmaxChannels(const Var& x) {
  const Tensor& in = x.value();
  if (in.rank() != 3) throw InvalidArgument("SoftmaxChannels expects [C, H, W]");
  const int c_n = in.dim(0);
  const size_t plane = static_cast<size_t>(in.dim(1)) * in.dim(2);
  Tensor out(in.shape());
  for (size_t p = 0; p < plane; ++p) {
    double mx = in[p];
    for (int c = 1; c < c_n; ++c) mx = std::max(mx, in[c * plane + p]);
    double z = 0.0;
    for (int c = 0; c < c_n; ++c) {
      const double e = std::exp(in[c * plane + p] - mx);
      out[c * plane + p] = e;
      z += e;
    }
    for (int c = 0; c < c_n; ++c) out[c * plane + p] /= z;
  }
  return MakeOp(std::move(out), {x}, [c_n, plane](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (size_t p = 0; p < plane; ++p) {
      double dot = 0.0;
      for (int c = 0; c < c_n; ++c) dot += n.grad[c * plane + p] * n.value[c * plane + p];
      for (int c = 0; c < c_n; ++c) {
        g[c * plane + p] += n.value[c * plane + p] * (n.grad[c * plane + p] - dot);
      }
    }
  });
}

Var Channel(const Var& x, int c) {
  const Tensor& in = x.value();
  if (in.rank() != 3 || c < 0 || c >= in.dim(0)) throw InvalidArgument("Channel: bad index");
  const int h = in.dim(1), w = in.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  Tensor out({h, w});
  std::copy(in.data() + c * plane, in.data() + (c + 1) * plane, out.data());
  return MakeOp(std::move(out), {x}, [c, plane](Node& n) {
    double* g = n.inputs[0]->Grad().data() + c * plane;
    for (size_t i = 0; i < plane; ++i) g[i] += n.grad[i];
  });
}

Var ColumnMean(const Var& x) {
  const Tensor& in = x.value();
  if (in.rank() != 3) throw InvalidArgument("ColumnMean expects [C, H, W]");
  const int c_n = in.dim(0), h = in.dim(1), w = in.dim(2);
  Tensor out({c_n, w});
  for (int c = 0; c < c_n; ++c) {
    for (int r = 0; r < h; ++r) {
      for (int u = 0; u < w; ++u) out.at(c, u) += in.at(c, r, u);
    }
    for (int u = 0; u < w; ++u) out.at(c, u) /= h;
  }
  return MakeOp(std::move(out), {x}, [c_n, h, w](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (int c = 0; c < c_n; ++c) {
      for (int r = 0; r < h; ++r) {
        for (int u = 0; u < w; ++u) g.at(c, r, u) += n.grad.at(c, u) / h;
      }
    }
  });
}

Var SampleBilinear(const Var& x, std::span<const Point> points) {
  const Tensor& in = x.value();
  if (in.rank() != 3) throw InvalidArgument("SampleBilinear expects [C, H, W]");
  const int c_n = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int n_pts = static_cast<int>(points.size());
  std::vector<std::pair<LinearTap, LinearTap>> taps;
  taps.reserve(points.size());
  for (const Point& p : points) taps.emplace_back(MakeTap(p.y, h), MakeTap(p.x, w));
  Tensor out({n_pts, c_n});
  for (int i = 0; i < n_pts; ++i) {
    const auto& [ty, tx] = taps[i];
    for (int c = 0; c < c_n; ++c) {
      const double top = (1 - tx.w1) * in.at(c, ty.i0, tx.i0) + tx.w1 * in.at(c, ty.i0, tx.i1);
      const double bot = (1 - tx.w1) * in.at(c, ty.i1, tx.i0) + tx.w1 * in.at(c, ty.i1, tx.i1);
      out.at(i, c) = (1 - ty.w1) * top + ty.w1 * bot;
    }
  }
  return MakeOp(std::move(out), {x}, [taps, c_n](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (size_t i = 0; i < taps.size(); ++i) {
      const auto& [ty, tx] = taps[i];
      for (int c = 0; c < c_n; ++c) {
        const double gv = n.grad.at(static_cast<int>(i), c);
        g.at(c, ty.i0, tx.i0) += gv * (1 - ty.w1) * (1 - tx.w1);
        g.at(c, ty.i0, tx.i1) += gv * (1 - ty.w1) * tx.w1;
        g.at(c, ty.i1, tx.i0) += gv * ty.w1 * (1 - tx.w1);
        g.at(c, ty.i1, tx.i1) += gv * ty.w1 * tx.w1;
      }
    }
  });
}

Var SampleColumns(const Var& x, std::span<const double> columns) {
  const Tensor& in = x.value();
  if (in.rank() != 2) throw InvalidArgument("SampleColumns expects [C, W]");
  const int c_n = in.dim(0), w = in.dim(1);
  const int n_pts = static_cast<int>(columns.size());
  std::vector<LinearTap> taps;
  for (double col : columns) taps.push_back(MakeTap(col, w));
  Tensor out({n_pts, c_n});
  for (int i = 0; i < n_pts; ++i) {
    for (int c = 0; c < c_n; ++c) {
      out.at(i, c) = (1 - taps[i].w1) * in.at(c, taps[i].i0) + taps[i].w1 * in.at(c, taps[i].i1);
    }
  }
  return MakeOp(std::move(out), {x}, [taps, c_n](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (size_t i = 0; i < taps.size(); ++i) {
      for (int c = 0; c < c_n; ++c) {
        const double gv = n.grad.at(static_cast<int>(i), c);
        g.at(c, taps[i].i0) += gv * (1 - taps[i].w1);
        g.at(c, taps[i].i1) += gv * taps[i].w1;
      }
    }
  });
}

Var ConcatColumns(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("ConcatColumns: no inputs");
  const int rows = parts[0].value().dim(0);
  std::vector<int> widths;
  int total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 2 || p.value().dim(0) != rows) {
      throw InvalidArgument("ConcatColumns: row count mismatch");
    }
    widths.push_back(p.value().dim(1));
    total += widths.back();
  }
  Tensor out({rows, total});
  int offset = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < widths[k]; ++c) out.at(r, offset + c) = parts[k].value().at(r, c);
    }
    offset += widths[k];
  }
  return MakeOp(std::move(out), parts, [widths, rows](Node& n) {
    int off = 0;
    for (size_t k = 0; k < n.inputs.size(); ++k) {
      if (n.inputs[k]->requires_grad) {
        Tensor& g = n.inputs[k]->Grad();
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < widths[k]; ++c) g.at(r, c) += n.grad.at(r, off + c);
        }
      }
      off += widths[k];
    }
  });
}

Var MatMul(const Var& a, const Var& w) {
  const Tensor& av = a.value();
  const Tensor& wv = w.value();
  if (av.rank() != 2 || wv.rank() != 2 || av.dim(1) != wv.dim(0)) {
    throw InvalidArgument("MatMul: incompatible shapes " + ShapeString(av.shape()) +
                          " x " + ShapeString(wv.shape()));
  }
  const int n_rows = av.dim(0), d = av.dim(1), e = wv.dim(1);
  Tensor out({n_rows, e});
  for (int i = 0; i < n_rows; ++i) {
    for (int k = 0; k < d; ++k) {
      const double aik = av.at(i, k);
      for (int j = 0; j < e; ++j) out.at(i, j) += aik * wv.at(k, j);
    }
  }
  return MakeOp(std::move(out), {a, w}, [n_rows, d, e](Node& n) {
    Node& an = *n.inputs[0];
    Node& wn = *n.inputs[1];
    if (an.requires_grad) {
      Tensor& g = an.Grad();
      for (int i = 0; i < n_rows; ++i) {
        for (int k = 0; k < d; ++k) {
          double s = 0.0;
          for (int j = 0; j < e; ++j) s += n.grad.at(i, j) * wn.value.at(k, j);
          g.at(i, k) += s;
        }
      }
    }
    if (wn.requires_grad) {
      Tensor& g = wn.Grad();
      for (int i = 0; i < n_rows; ++i) {
        for (int k = 0; k < d; ++k) {
          const double aik = an.value.at(i, k);
          for (int j = 0; j < e; ++j) g.at(k, j) += aik * n.grad.at(i, j);
        }
      }
    }
  });
}

Var AddRowBias(const Var& a, const Var& bias) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || bias.value().size() != static_cast<size_t>(av.dim(1))) {
    throw InvalidArgument("AddRowBias: incompatible shapes");
  }
  const int rows = av.dim(0), cols = av.dim(1);
  Tensor out = av;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at(r, c) += bias.value()[c];
  }
  return MakeOp(std::move(out), {a, bias}, [rows, cols](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->Grad().AddScaled(n.grad);
    if (n.inputs[1]->requires_grad) {
      Tensor& g = n.inputs[1]->Grad();
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) g[c] += n.grad.at(r, c);
      }
    }
  });
}

Var ChainNeighborSum(const Var& h) {
  const Tensor& hv = h.value();
  if (hv.rank() != 2) throw InvalidArgument("ChainNeighborSum expects [N, D]");
  const int rows = hv.dim(0), cols = hv.dim(1);
  Tensor out({rows, cols});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      if (r > 0) s += hv.at(r - 1, c);
      if (r + 1 < rows) s += hv.at(r + 1, c);
      out.at(r, c) = s;
    }
  }
  return MakeOp(std::move(out), {h}, [rows, cols](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (r > 0) g.at(r - 1, c) += n.grad.at(r, c);
        if (r + 1 < rows) g.at(r + 1, c) += n.grad.at(r, c);
      }
    }
  });
}

Var Column(const Var& a, int j) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || j < 0 || j >= av.dim(1)) {
    throw InvalidArgument("Column: index out of range");
  }
  const int rows = av.dim(0);
  Tensor out({rows});
  for (int r = 0; r < rows; ++r) out[r] = av.at(r, j);
  return MakeOp(std::move(out), {a}, [rows, j](Node& n) {
    Tensor& g = n.inputs[0]->Grad();
    for (int r = 0; r < rows; ++r) g.at(r, j) += n.grad[r];
  });
}

}  // namespace navseg::ad
